#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "sd/analysis.hpp"
#include "sd/mms.hpp"

using namespace sd;

namespace {

BlockSystem benchmark_system(int nx, Condition cond = Condition::BJS) {
  PhysicalParams p;
  p.condition = cond;
  const ManufacturedSolution mms(p);
  return assemble_coupled(build_grid(square_grid(nx)), p, mms.sources(), 0);
}

Vector random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Vector b(n);
  for (int i = 0; i < n; ++i) b[i] = dist(rng);
  return b;
}

const double golden_low = (3.0 - std::sqrt(5.0)) / 2.0;
const double golden_high = (3.0 + std::sqrt(5.0)) / 2.0;

}  // namespace

TEST_CASE("weight applications invert each other") {
  const BlockSystem sys = benchmark_system(8);
  const WeightH H = make_weight(sys);
  const int N = sys.n + sys.m + sys.l;
  const Vector x = random_vector(N, 1);
  CHECK((H.solve(H.apply(x)) - x).norm() <= 1e-8 * x.norm());
  CHECK((H.apply(H.solve(x)) - x).norm() <= 1e-8 * x.norm());
  CHECK(H.norm(x) == doctest::Approx(std::sqrt(x.dot(H.apply(x)))).epsilon(1e-12));
  CHECK(H.dual_norm(x) == doctest::Approx(std::sqrt(x.dot(H.solve(x)))).epsilon(1e-12));

  const DenseMatrix Hd = dense_weight(H);
  const DenseMatrix Hinv = dense_weight_inverse(H);
  CHECK((Hd * Hinv - DenseMatrix::Identity(N, N)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((Hd - Hd.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((Hd * x - H.apply(x)).norm() <= 1e-10 * x.norm());
}

TEST_CASE("an exact inverse preconditioner collapses the spectrum to one") {
  const BlockSystem sys = benchmark_system(8);
  Eigen::SparseMatrix<double> colmajor(sys.monolithic);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(colmajor);
  REQUIRE(lu.info() == Eigen::Success);
  const Spectrum s = preconditioned_spectrum(
      sys, [&](const Vector& r) { return Vector(lu.solve(r)); });
  for (int i = 0; i < s.values.size(); ++i) {
    CHECK(std::abs(s.values[i] - std::complex<double>(1.0, 0.0)) <= 1e-8);
  }
}

TEST_CASE("norm equivalence constants of the block preconditioners") {
  const BlockSystem sys = benchmark_system(8);
  const WeightH H = make_weight(sys);
  const DenseMatrix Hinv = dense_weight_inverse(H);
  const DenseMatrix M = DenseMatrix(sys.monolithic);

  SUBCASE("the diagonal form is a perfect H-isometry") {
    const EquivalenceConstants c = norm_equivalence(dense_pdiag(sys, H), dense_weight(H), Hinv);
    CHECK(c.gamma == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c.Gamma == doctest::Approx(1.0).epsilon(1e-6));
  }

  SUBCASE("the triangular form attains the golden-ratio constants") {
    const EquivalenceConstants c = norm_equivalence(dense_ptri(sys, H), dense_weight(H), Hinv);
    CHECK(c.gamma == doctest::Approx(std::sqrt(golden_low)).epsilon(1e-6));
    CHECK(c.Gamma == doctest::Approx(std::sqrt(golden_high)).epsilon(1e-6));
  }
}

TEST_CASE("congruence representative spectrum") {
  for (int nx : {4, 8}) {
    const BlockSystem sys = benchmark_system(nx);
    const WeightH H = make_weight(sys);
    const MbarCheck mc = mbar_check(sys, H);
    CHECK(mc.max_set_distance <= 1e-6);
    CHECK(mc.projector_defect <= 1e-8);
    CHECK(mc.golden_attained);
    bool has_golden_value = false;
    for (int i = 0; i < mc.eigenvalues.size(); ++i) {
      if (std::abs(mc.eigenvalues[i] - 0.381966) <= 1e-5) has_golden_value = true;
    }
    CHECK(has_golden_value);
  }
}

TEST_CASE("the interface-constraint projector has unit norm") {
  for (int nx : {4, 8, 16}) {
    const BlockSystem sys = benchmark_system(nx);
    const WeightH H = make_weight(sys);
    CHECK(projection_norm_surrogate(sys, H) == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("field-of-values constants of the triangular preconditioner") {
  // On the decoupled operator the constants are exact: the field of values of
  // H^-1 (decoupled M) P_tri^-1 reproduces the norm-equivalence extremes, so
  // gamma = 1/2 and Gamma = sqrt((3+sqrt5)/2).
  SUBCASE("decoupled operator attains the golden-ratio constants exactly") {
    const BlockSystem dec = drop_interface_coupling(benchmark_system(8));
    const WeightH H = make_weight(dec);
    const ApplyFn pinv = analysis_pinv(dec, PrecondKind::Tri, PrecondMode::Exact, &H);
    const EquivalenceConstants c = fov_constants(dec, pinv, H);
    CHECK(c.gamma == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(c.Gamma == doctest::Approx(std::sqrt(golden_high)).epsilon(1e-6));
  }

  // The interface blocks shift the coupled constants away from the decoupled
  // values (the interface operator is O(1) in the natural norms, not small),
  // and gamma turns negative.  What remains h-robust -- and what the solver
  // behavior reflects -- is that both constants are mesh-independent.
  SUBCASE("coupled constants are stable under refinement") {
    const BlockSystem coarse = benchmark_system(8);
    const WeightH Hc = make_weight(coarse);
    const ApplyFn pc = analysis_pinv(coarse, PrecondKind::Tri, PrecondMode::Exact, &Hc);
    const EquivalenceConstants c8 = fov_constants(coarse, pc, Hc);
    CHECK(std::abs(c8.gamma) > 0.0);
    CHECK(c8.Gamma > std::abs(c8.gamma));

    const BlockSystem fine = benchmark_system(16);
    const WeightH Hf = make_weight(fine);
    const ApplyFn pf = analysis_pinv(fine, PrecondKind::Tri, PrecondMode::Exact, &Hf);
    const EquivalenceConstants c16 = fov_constants(fine, pf, Hf);
    CHECK(std::abs(c16.gamma - c8.gamma) <= 0.10 * std::abs(c8.gamma));
    CHECK(std::abs(c16.Gamma - c8.Gamma) <= 0.10 * std::abs(c8.Gamma));
  }
}

TEST_CASE("first-cycle residuals obey the field-of-values bound") {
  // The decoupled operator has gamma = 1/2 > 0, so the contraction envelope
  // (1 - gamma^2/Gamma^2)^(s/2) is meaningfully below one per step.
  const BlockSystem dec = drop_interface_coupling(benchmark_system(8));
  const WeightH Hd = make_weight(dec);
  const ApplyFn pd = analysis_pinv(dec, PrecondKind::Tri, PrecondMode::Exact, &Hd);
  const EquivalenceConstants cd = fov_constants(dec, pd, Hd);
  REQUIRE(cd.gamma > 0);
  REQUIRE(cd.Gamma > cd.gamma);

  const ResidualBoundReport rep = residual_bound_check(dec, pd, Hd, cd.gamma, cd.Gamma, 15);
  REQUIRE(rep.ratios.size() == rep.bounds.size());
  REQUIRE(!rep.ratios.empty());
  CHECK(rep.all_pass);

  // The coupled operator satisfies its own (weaker) measured envelope too.
  const BlockSystem sys = benchmark_system(8);
  const WeightH H = make_weight(sys);
  const ApplyFn pinv = analysis_pinv(sys, PrecondKind::Tri, PrecondMode::Exact, &H);
  const EquivalenceConstants c = fov_constants(sys, pinv, H);
  CHECK(residual_bound_check(sys, pinv, H, c.gamma, c.Gamma, 15).all_pass);

  // Negative control: an inflated contraction constant must be caught.  With
  // gamma near Gamma the per-step envelope drops to ~0.14, far below the
  // actual first-step ratio (~0.88), so the check has to report a violation.
  const ResidualBoundReport bad =
      residual_bound_check(sys, pinv, H, 0.99 * c.Gamma, c.Gamma, 15);
  CHECK_FALSE(bad.all_pass);
}

TEST_CASE("preconditioned spectra cluster as the theory predicts") {
  // With the block-diagonal preconditioner the non-unit eigenvalues solve
  // lambda^2 - lambda + 1 = 0 in the limit, i.e. (1 +- i sqrt3)/2: a complex
  // pair with real part 1/2 on the unit circle.  The cluster set is therefore
  // {1, (1 +- i sqrt3)/2}; the triangular form clusters at 1 alone.
  const std::vector<std::complex<double>> diag_set = {
      {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}, {0.5, -std::sqrt(3.0) / 2.0}};
  for (Condition cond : {Condition::BJS, Condition::BJ}) {
    const BlockSystem sys = benchmark_system(10, cond);
    const WeightH H = make_weight(sys);

    const Spectrum sd_ = preconditioned_spectrum(
        sys, analysis_pinv(sys, PrecondKind::Diag, PrecondMode::Exact, &H));
    const ClusterStats cd = cluster_stats(sd_, diag_set, 0.05);
    CHECK(cd.min_abs > 0.1);
    CHECK(cd.fraction >= 0.78);

    const Spectrum st = preconditioned_spectrum(
        sys, analysis_pinv(sys, PrecondKind::Tri, PrecondMode::Exact, &H));
    const ClusterStats ct = cluster_stats(st, {1.0}, 0.05);
    CHECK(ct.min_abs > 0.1);
    CHECK(ct.fraction >= 0.82);
  }
}

TEST_CASE("cluster fractions do not degrade under refinement") {
  double prev = -1.0;
  for (int nx : {10, 20}) {
    const BlockSystem sys = benchmark_system(nx);
    const WeightH H = make_weight(sys);
    const Spectrum st = preconditioned_spectrum(
        sys, analysis_pinv(sys, PrecondKind::Tri, PrecondMode::Exact, &H));
    const ClusterStats ct = cluster_stats(st, {1.0}, 0.05);
    if (prev >= 0.0) CHECK(ct.fraction >= prev - 1e-12);
    prev = ct.fraction;
  }
}

TEST_CASE("constraint-form spectra obey the quadratic eigenvalue identity") {
  const BlockSystem sys = benchmark_system(8);
  const QuadraticCheck qc = constraint_quadratic_check(sys);
  CHECK(qc.total == sys.n + sys.m + sys.l);
  CHECK(qc.lambda_one + qc.quadratic == qc.total);
  CHECK(qc.max_residual <= 1e-6);
  CHECK(qc.max_lambda_one_dev <= 1e-6);
}

TEST_CASE("full-velocity constraint form pins the real parts at one") {
  // With G equal to the full velocity block the quotient eta is identically 1,
  // so every eigenvalue is 1 or 1 +- i sqrt(xi): real part pinned at one.
  // lambda = 1 appears in Jordan chains of length three here, which caps the
  // attainable eigenvalue accuracy near eps^(1/3) ~ 6e-6; tolerances sit above
  // that floor, not at roundoff.
  const BlockSystem sys = benchmark_system(8);
  const Spectrum s = preconditioned_spectrum(
      sys, analysis_pinv(sys, PrecondKind::Con, PrecondMode::Exact, nullptr, true));
  for (int i = 0; i < s.values.size(); ++i) {
    CHECK(std::abs(s.values[i].real() - 1.0) <= 1e-4);
  }
  const QuadraticCheck qc = constraint_quadratic_check(sys, true, 1e-4);
  CHECK(qc.lambda_one + qc.quadratic == qc.total);
  CHECK(qc.max_lambda_one_dev <= 1e-4);
  CHECK(qc.max_residual <= 1e-6);
}

TEST_CASE("removing the interface coupling makes the constraint spectrum real") {
  const BlockSystem sys = drop_interface_coupling(benchmark_system(8));
  const Spectrum s = preconditioned_spectrum(
      sys, analysis_pinv(sys, PrecondKind::Con, PrecondMode::Exact));
  // 1e-7 rather than roundoff: eigenvalue 1 is defective here, which caps the
  // attainable QR accuracy near sqrt(machine epsilon).
  for (int i = 0; i < s.values.size(); ++i) {
    CHECK(std::abs(s.values[i].imag()) <= 1e-7);
  }
}

TEST_CASE("velocity-approximation contraction estimate is a proper norm value") {
  const BlockSystem sys = benchmark_system(8);
  const double rho1 = rho1_estimate(sys);
  CHECK(rho1 >= 0.0);
  CHECK(rho1 < 1.0);
}

TEST_CASE("cluster statistics arithmetic") {
  Spectrum s;
  s.values = Eigen::VectorXcd(4);
  s.values << std::complex<double>(1.0, 0.0), std::complex<double>(0.52, 0.01),
      std::complex<double>(0.2, 0.0), std::complex<double>(1.04, 0.0);
  const ClusterStats c = cluster_stats(s, {0.5, 1.0}, 0.05);
  CHECK(c.total == 4);
  CHECK(c.within == 3);
  CHECK(c.fraction == doctest::Approx(0.75));
  CHECK(c.min_abs == doctest::Approx(0.2));
  CHECK(c.max_dist == doctest::Approx(0.3));
  CHECK_THROWS_AS(cluster_stats(s, {}, 0.05), ConfigError);

  // Complex centers measure the full complex distance, not just the real part.
  const std::vector<std::complex<double>> off_axis = {{0.5, 0.25}};
  const ClusterStats cc = cluster_stats(s, off_axis, 0.26);
  CHECK(cc.within == 1);  // only 0.52 + 0.01i is near 0.5 + 0.25i
  CHECK(cc.max_dist == doctest::Approx(std::abs(std::complex<double>(1.04, 0.0) -
                                                std::complex<double>(0.5, 0.25))));
}
