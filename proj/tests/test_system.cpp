#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <utility>

#include "sd/linalg.hpp"
#include "sd/mms.hpp"
#include "sd/system.hpp"

using namespace sd;

namespace {

double coeff(const SparseMatrix& M, int r, int c) { return M.coeff(r, c); }

double residual_inf(const BlockSystem& sys, const Vector& x) {
  return (spmv(sys.monolithic, x) - sys.rhs).cwiseAbs().maxCoeff();
}

// Interpolant of closed-form fields onto the unknown vector.
Vector interpolate(const StaggeredGrid& g, const ScalarField& uf, const ScalarField& vf,
                   const ScalarField& pff, const ScalarField& ppm) {
  Vector x(g.dof.total());
  const GridSpec& sp = g.spec;
  for (int level = 0; level <= sp.ny_ff; ++level)
    for (int i = 1; i <= sp.nx - 1; ++i) {
      const auto pos = g.u_pos(i, level);
      x[g.dof.u(i, level)] = uf(pos.x(), pos.y());
    }
  for (int level = 0; level < sp.ny_ff; ++level)
    for (int i = 0; i < sp.nx; ++i) {
      const auto pos = g.v_pos(i, level);
      x[g.dof.v(i, level)] = vf(pos.x(), pos.y());
    }
  for (int j = 0; j < sp.ny_ff; ++j)
    for (int i = 0; i < sp.nx; ++i) {
      const auto pos = g.pff_pos(i, j);
      x[g.dof.pff(i, j)] = pff(pos.x(), pos.y());
    }
  for (int jj = 0; jj < sp.ny_pm; ++jj)
    for (int i = 0; i < sp.nx; ++i) {
      const auto pos = g.ppm_cell_pos(i, jj);
      x[g.dof.ppm_cell(i, jj)] = ppm(pos.x(), pos.y());
    }
  for (int i = 0; i < sp.nx; ++i) {
    const auto pos = g.ppm_iface_pos(i);
    x[g.dof.ppm_iface(i)] = ppm(pos.x(), pos.y());
  }
  return x;
}

}  // namespace

TEST_CASE("benchmark coefficients at h=1/8 match hand-computed values") {
  const StaggeredGrid g = build_grid(square_grid(8));
  PhysicalParams p;  // mu=1e-3, k=1e-2, alpha=1, BJS
  const BlockSystem sys = assemble_coupled(g, p, SourceFields{});
  const DofMap& d = g.dof;
  const int n = sys.n, m = sys.m;
  REQUIRE(n == 67);
  REQUIRE(m == 32);
  REQUIRE(sys.l == 40);
  const auto lglob = [&](int dof) { return n + m + (dof - n - m); };  // identity, for clarity
  const auto lidx = [&](int dof) { return dof - n - m; };

  SUBCASE("interface mass-conservation row") {
    const int s = 3;
    const int row = lglob(d.ppm_iface(s));
    CHECK(coeff(sys.C1, lidx(d.ppm_iface(s)), d.v(s, 0)) == doctest::Approx(-0.125).epsilon(1e-14));
    // Monolithic block (3,3) stores -D.
    CHECK(coeff(sys.monolithic, row, row) == doctest::Approx(-20.0).epsilon(1e-12));
    CHECK(coeff(sys.monolithic, row, lglob(d.ppm_cell(s, 3))) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(coeff(sys.monolithic, row, d.v(s, 0)) == doctest::Approx(-0.125).epsilon(1e-14));
  }

  SUBCASE("porous-medium interior and interface-adjacent rows") {
    // Interior cell: four two-point fluxes of (k/mu) = 10 each.
    const int r_int = lglob(d.ppm_cell(3, 1));
    CHECK(coeff(sys.monolithic, r_int, r_int) == doctest::Approx(-40.0).epsilon(1e-12));
    CHECK(coeff(sys.monolithic, r_int, lglob(d.ppm_cell(4, 1))) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(coeff(sys.monolithic, r_int, lglob(d.ppm_cell(3, 0))) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(coeff(sys.monolithic, r_int, lglob(d.ppm_cell(3, 2))) == doctest::Approx(10.0).epsilon(1e-12));
    // Top-row cell couples to the interface node at half spacing (weight 20).
    const int r_top = lglob(d.ppm_cell(3, 3));
    CHECK(coeff(sys.monolithic, r_top, lglob(d.ppm_iface(3))) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(coeff(sys.monolithic, r_top, r_top) == doctest::Approx(-50.0).epsilon(1e-12));
  }

  SUBCASE("interface normal-force row") {
    const int row = d.v(3, 0);
    CHECK(coeff(sys.A, row, row) == doctest::Approx(3e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.v(3, 1)) == doctest::Approx(-2e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.v(2, 0)) == doctest::Approx(-0.5e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.v(4, 0)) == doctest::Approx(-0.5e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.u(4, 1)) == doctest::Approx(-1e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.u(4, 0)) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.u(3, 1)) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.u(3, 0)) == doctest::Approx(-1e-3).epsilon(1e-12));
    // Pressure couplings: +hx on the free-flow cell above, -hx on the
    // interface porous pressure.
    CHECK(coeff(sys.monolithic, row, n + 0 * 8 + 3) == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(coeff(sys.monolithic, row, lglob(d.ppm_iface(3))) == doctest::Approx(-0.125).epsilon(1e-14));
  }

  SUBCASE("tangential slip row") {
    const int row = d.u(3, 0);
    // mu*(alpha/sqrt(kxx))*hx + 2 mu hx/hy = 1.25e-3 + 2e-3.
    CHECK(coeff(sys.A, row, row) == doctest::Approx(3.25e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.u(3, 1)) == doctest::Approx(-2e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.v(2, 0)) == doctest::Approx(1e-3).epsilon(1e-12));
    CHECK(coeff(sys.A, row, d.v(3, 0)) == doctest::Approx(-1e-3).epsilon(1e-12));
    // BJS: no porous-pressure coupling in the slip row.
    CHECK(coeff(sys.monolithic, row, lglob(d.ppm_iface(2))) == 0.0);
    CHECK(coeff(sys.monolithic, row, lglob(d.ppm_iface(3))) == 0.0);
  }

  SUBCASE("pressure-gradient coupling in the slip row under the nonsymmetric closure") {
    PhysicalParams pbj = p;
    pbj.condition = Condition::BJ;
    const BlockSystem bj = assemble_coupled(g, pbj, SourceFields{});
    const int row = d.u(3, 0);
    CHECK(coeff(bj.monolithic, row, lglob(d.ppm_iface(2))) == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(coeff(bj.monolithic, row, lglob(d.ppm_iface(3))) == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("the two interface closures differ only by the slip-row pressure coupling") {
  const StaggeredGrid g = build_grid(square_grid(8));
  PhysicalParams p;
  p.condition = Condition::BJS;
  const BlockSystem bjs = assemble_coupled(g, p, SourceFields{});
  p.condition = Condition::BJ;
  const BlockSystem bj = assemble_coupled(g, p, SourceFields{});

  SparseMatrix diff = bj.monolithic - bjs.monolithic;
  diff.prune(0.0);
  const double gamma = p.alpha * p.kyy / std::sqrt(p.kxx);

  std::set<std::pair<int, int>> expected;
  const int base = bjs.n + bjs.m + 4 * 8;  // first interface-pressure column
  for (int s = 1; s <= 7; ++s) {
    expected.insert({g.dof.u(s, 0), base + s - 1});
    expected.insert({g.dof.u(s, 0), base + s});
  }

  std::set<std::pair<int, int>> got;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      got.insert({static_cast<int>(it.row()), static_cast<int>(it.col())});
      CHECK(std::abs(std::abs(it.value()) - gamma) <= 1e-15);
    }
  }
  CHECK(got == expected);
  CHECK((bj.rhs - bjs.rhs).norm() == 0.0);
}

TEST_CASE("symmetric closure yields an exactly symmetric matrix") {
  const StaggeredGrid g = build_grid(square_grid(8));
  PhysicalParams p;
  p.condition = Condition::BJS;
  const BlockSystem sys = assemble_coupled(g, p, SourceFields{});
  SparseMatrix diff = sys.monolithic - SparseMatrix(sys.monolithic.transpose());
  const double asym = diff.coeffs().size() ? diff.coeffs().abs().maxCoeff() : 0.0;
  CHECK(asym == 0.0);
}

TEST_CASE("block structure: A SPD, D symmetric, continuity full rank") {
  for (int nx : {8, 16}) {
    const StaggeredGrid g = build_grid(square_grid(nx));
    PhysicalParams p;
    const BlockSystem sys = assemble_coupled(g, p, SourceFields{}, 0);

    DenseMatrix Ad = DenseMatrix(sys.A);
    CHECK((Ad - Ad.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> esA(Ad, Eigen::EigenvaluesOnly);
    CHECK(esA.eigenvalues().minCoeff() > 0.0);

    DenseMatrix Dd = DenseMatrix(sys.D);
    CHECK((Dd - Dd.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> esD(Dd, Eigen::EigenvaluesOnly);
    CHECK(esD.eigenvalues().minCoeff() > 0.0);

    Eigen::FullPivLU<DenseMatrix> lu(DenseMatrix(sys.B));
    CHECK(lu.rank() == sys.m);

    // Velocity sub-blocks partition A.
    CHECK(sys.A11.rows() == g.dof.n_u);
    CHECK(sys.A22.rows() == g.dof.n_v);
    DenseMatrix recomposed = DenseMatrix::Zero(sys.n, sys.n);
    recomposed.topLeftCorner(g.dof.n_u, g.dof.n_u) = DenseMatrix(sys.A11);
    recomposed.bottomRightCorner(g.dof.n_v, g.dof.n_v) = DenseMatrix(sys.A22);
    recomposed.topRightCorner(g.dof.n_u, g.dof.n_v) = DenseMatrix(sys.A12);
    recomposed.bottomLeftCorner(g.dof.n_v, g.dof.n_u) = DenseMatrix(sys.A12.transpose());
    CHECK((DenseMatrix(sys.A) - recomposed).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("constant velocity fields are reproduced exactly") {
  const double c1 = 0.3, c2 = -0.2;
  for (Condition cond : {Condition::BJS, Condition::BJ}) {
    const StaggeredGrid g = build_grid(square_grid(8));
    PhysicalParams p;
    p.condition = cond;
    SourceFields s;
    s.vbar = [&](double, double) { return Eigen::Vector2d(c1, c2); };
    s.g_mass = [&](double) { return c2; };
    s.g_bj = [&](double) { return c1; };
    const BlockSystem sys = assemble_coupled(g, p, s);
    const Vector x = interpolate(
        g, [&](double, double) { return c1; }, [&](double, double) { return c2; },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    CHECK(residual_inf(sys, x) <= 1e-12);
  }
}

TEST_CASE("linear porous pressure is reproduced exactly") {
  for (Condition cond : {Condition::BJS, Condition::BJ}) {
    const StaggeredGrid g = build_grid(square_grid(8));
    PhysicalParams p;
    p.condition = cond;
    SourceFields s;
    s.pbar = [](double x, double) { return x; };
    s.g_bonf = [](double x) { return -x; };
    s.g_bj = [&](double) { return cond == Condition::BJ ? p.kyy / p.mu : 0.0; };
    const BlockSystem sys = assemble_coupled(g, p, s);
    const Vector x = interpolate(
        g, [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
        [](double, double) { return 0.0; }, [](double xx, double) { return xx; });
    CHECK(residual_inf(sys, x) <= 1e-12);
  }
}

TEST_CASE("linear free-flow pressure is reproduced exactly") {
  const StaggeredGrid g = build_grid(square_grid(8));
  PhysicalParams p;
  SourceFields s;
  s.f_ff = [](double, double) { return Eigen::Vector2d(1.0, 0.0); };
  s.g_bonf = [](double x) { return x; };
  const BlockSystem sys = assemble_coupled(g, p, s);
  const Vector x = interpolate(
      g, [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
      [](double xx, double) { return xx; }, [](double, double) { return 0.0; });
  CHECK(residual_inf(sys, x) <= 1e-12);
}

TEST_CASE("interpolated smooth fields satisfy the discrete equations to truncation order") {
  PhysicalParams p;
  double prev = -1.0;
  for (int nx : {8, 16, 32}) {
    const ManufacturedSolution mms(p);
    const StaggeredGrid g = build_grid(square_grid(nx));
    const BlockSystem sys = assemble_coupled(g, p, mms.sources(), 0);
    const Vector x = exact_interpolant(g, mms);
    const double r = residual_inf(sys, x);
    if (prev > 0.0) CHECK(r <= prev / 2.5);
    prev = r;
  }
}

TEST_CASE("porous velocity reconstruction") {
  const StaggeredGrid g = build_grid(square_grid(8));
  PhysicalParams p;
  const int nx = 8, nyp = 4;

  SUBCASE("constant pressure gives zero velocity") {
    SourceFields s;
    s.pbar = [](double, double) { return 2.5; };
    Vector ppm = Vector::Constant(g.dof.l, 2.5);
    const DarcyVelocity v = postprocess_darcy_velocity(g, p, s, ppm);
    CHECK(v.ux.cwiseAbs().maxCoeff() == 0.0);
    CHECK(v.uy.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("linear pressure gives the uniform velocity -K/mu grad p") {
    SourceFields s;
    s.pbar = [](double x, double) { return x; };
    Vector ppm(g.dof.l);
    for (int jj = 0; jj < nyp; ++jj)
      for (int i = 0; i < nx; ++i) ppm[jj * nx + i] = g.ppm_cell_pos(i, jj).x();
    for (int i = 0; i < nx; ++i) ppm[nyp * nx + i] = g.ppm_iface_pos(i).x();
    const DarcyVelocity v = postprocess_darcy_velocity(g, p, s, ppm);
    CHECK((v.ux.array() + p.kxx / p.mu).abs().maxCoeff() <= 1e-12);
    CHECK(v.uy.cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("manufactured pressure converges at the face centers") {
    double prev = -1.0;
    for (int n : {8, 16, 32}) {
      const StaggeredGrid gr = build_grid(square_grid(n));
      const ManufacturedSolution mms{p};
      Vector ppm(gr.dof.l);
      for (int jj = 0; jj < gr.spec.ny_pm; ++jj)
        for (int i = 0; i < gr.spec.nx; ++i) {
          const auto pos = gr.ppm_cell_pos(i, jj);
          ppm[jj * gr.spec.nx + i] = mms.p_pm(pos.x(), pos.y());
        }
      for (int i = 0; i < gr.spec.nx; ++i)
        ppm[gr.spec.ny_pm * gr.spec.nx + i] = mms.p_pm(gr.ppm_iface_pos(i).x(), 0.0);
      const DarcyVelocity v = postprocess_darcy_velocity(gr, p, mms.sources(), ppm);

      double err = 0.0;
      for (int i = 1; i < gr.spec.nx; ++i)  // interior vertical faces
        for (int jj = 0; jj < gr.spec.ny_pm; ++jj) {
          const double x = i * gr.hx();
          const double y = -0.5 + (jj + 0.5) * gr.hy_pm();
          err = std::max(err, std::abs(v.ux(i, jj) - mms.darcy_velocity(x, y)(0)));
        }
      for (int i = 0; i < gr.spec.nx; ++i)  // interior horizontal faces
        for (int lev = 1; lev < gr.spec.ny_pm; ++lev) {
          const double x = (i + 0.5) * gr.hx();
          const double y = -0.5 + lev * gr.hy_pm();
          err = std::max(err, std::abs(v.uy(i, lev) - mms.darcy_velocity(x, y)(1)));
        }
      if (prev > 0.0) CHECK(err <= prev / 3.0);
      prev = err;
    }
  }

  SUBCASE("slice length is validated") {
    Vector bad = Vector::Zero(g.dof.l + 1);
    CHECK_THROWS_AS(postprocess_darcy_velocity(g, p, SourceFields{}, bad), ConfigError);
  }
}
