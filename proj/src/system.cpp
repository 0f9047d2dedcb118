#include "sd/system.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "sd/linalg.hpp"

namespace sd {

AssemblyBuffers make_buffers(const StaggeredGrid& grid) {
  AssemblyBuffers buf;
  buf.b1 = Vector::Zero(grid.dof.n());
  buf.b2 = Vector::Zero(grid.dof.m);
  buf.b3 = Vector::Zero(grid.dof.l);
  return buf;
}

// Symmetric coefficient pairs are written with byte-identical expressions in
// every pass so that assembled matrices are exactly (not just approximately)
// symmetric.

void assemble_stokes(const StaggeredGrid& grid, const PhysicalParams& p,
                     const SourceFields& s, AssemblyBuffers& buf) {
  const DofMap& d = grid.dof;
  const int nx = grid.spec.nx;
  const int nyf = grid.spec.ny_ff;
  const double hx = grid.hx();
  const double hy = grid.hy_ff();
  const double mu = p.mu;

  auto ubar = [&](double x, double y) { return s.vbar(x, y)(0); };
  auto vbar = [&](double x, double y) { return s.vbar(x, y)(1); };

  const double c_uu_ew = 2.0 * mu * (hy / hx);   // sigma_xx through E/W faces
  const double c_uu_ns = mu * (hx / hy);         // du/dy part through N/S faces
  const double c_half_ns = 2.0 * mu * (hx / hy); // half-spacing link across y=0 / ghost
  const double c_vv_ns = 2.0 * mu * (hx / hy);   // sigma_yy through N/S faces
  const double c_vv_ew = mu * (hy / hx);         // dv/dx part through E/W faces

  // u momentum rows; level j+1 is the face row of cell row j.
  for (int j = 0; j < nyf; ++j) {
    for (int i = 1; i <= nx - 1; ++i) {
      const int row = d.u(i, j + 1);
      const double xi = i * hx;
      const double yc = (j + 0.5) * hy;
      double diag = 0.0;

      // E face
      diag += c_uu_ew;
      if (i + 1 <= nx - 1) {
        buf.A.emplace_back(row, d.u(i + 1, j + 1), -c_uu_ew);
      } else {
        buf.b1[row] += c_uu_ew * ubar(1.0, yc);
      }
      // W face
      diag += c_uu_ew;
      if (i - 1 >= 1) {
        buf.A.emplace_back(row, d.u(i - 1, j + 1), -c_uu_ew);
      } else {
        buf.b1[row] += c_uu_ew * ubar(0.0, yc);
      }
      // N face
      if (j + 1 <= nyf - 1) {
        diag += c_uu_ns;
        buf.A.emplace_back(row, d.u(i, j + 2), -c_uu_ns);
        buf.A.emplace_back(row, d.v(i, j + 1), -mu);      // v_ne
        buf.A.emplace_back(row, d.v(i - 1, j + 1), mu);   // v_nw
      } else {
        // top wall: tangential Dirichlet by linear ghost reflection
        diag += c_half_ns;
        buf.b1[row] += c_half_ns * ubar(xi, 0.5);
        buf.b1[row] += mu * vbar((i + 0.5) * hx, 0.5) - mu * vbar((i - 0.5) * hx, 0.5);
      }
      // S face
      if (j >= 1) {
        diag += c_uu_ns;
        buf.A.emplace_back(row, d.u(i, j), -c_uu_ns);
        buf.A.emplace_back(row, d.v(i, j), mu);           // v_se
        buf.A.emplace_back(row, d.v(i - 1, j), -mu);      // v_sw
      } else {
        // face on the interface: half-spacing link to the tangential unknown
        diag += c_half_ns;
        buf.A.emplace_back(row, d.u(i, 0), -c_half_ns);
        buf.A.emplace_back(row, d.v(i, 0), mu);
        buf.A.emplace_back(row, d.v(i - 1, 0), -mu);
      }

      buf.A.emplace_back(row, row, diag);
      buf.b1[row] += hx * hy * s.f_ff(xi, yc)(0);
    }
  }

  // v momentum rows (interior levels; level 0 rows belong to the interface pass).
  for (int j = 1; j <= nyf - 1; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int row = d.v(i, j);
      const double xc = (i + 0.5) * hx;
      const double yj = j * hy;
      double diag = 0.0;

      // N face
      diag += c_vv_ns;
      if (j + 1 <= nyf - 1) {
        buf.A.emplace_back(row, d.v(i, j + 1), -c_vv_ns);
      } else {
        buf.b1[row] += c_vv_ns * vbar(xc, 0.5);
      }
      // S face (v below is always an unknown, interface level included)
      diag += c_vv_ns;
      buf.A.emplace_back(row, d.v(i, j - 1), -c_vv_ns);
      // E face
      if (i <= nx - 2) {
        diag += c_vv_ew;
        buf.A.emplace_back(row, d.v(i + 1, j), -c_vv_ew);
        buf.A.emplace_back(row, d.u(i + 1, j + 1), -mu);  // u_ne
        buf.A.emplace_back(row, d.u(i + 1, j), mu);       // u_se
      } else {
        diag += 2.0 * c_vv_ew;
        buf.b1[row] += 2.0 * c_vv_ew * vbar(1.0, yj);
        buf.b1[row] += mu * ubar(1.0, (j + 0.5) * hy) - mu * ubar(1.0, (j - 0.5) * hy);
      }
      // W face
      if (i >= 1) {
        diag += c_vv_ew;
        buf.A.emplace_back(row, d.v(i - 1, j), -c_vv_ew);
        buf.A.emplace_back(row, d.u(i, j + 1), mu);       // u_nw
        buf.A.emplace_back(row, d.u(i, j), -mu);          // u_sw
      } else {
        diag += 2.0 * c_vv_ew;
        buf.b1[row] += 2.0 * c_vv_ew * vbar(0.0, yj);
        buf.b1[row] += -mu * ubar(0.0, (j + 0.5) * hy) + mu * ubar(0.0, (j - 0.5) * hy);
      }

      buf.A.emplace_back(row, row, diag);
      buf.b1[row] += hx * hy * s.f_ff(xc, yj)(1);
    }
  }

  // Continuity rows: hy u_W - hy u_E + hx v_S - hx v_N = 0 (Dirichlet faces
  // eliminated into b2).
  for (int j = 0; j < nyf; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int local = j * nx + i;
      const double yc = (j + 0.5) * hy;
      if (i >= 1) {
        buf.B.emplace_back(local, d.u(i, j + 1), hy);
      } else {
        buf.b2[local] -= hy * ubar(0.0, yc);
      }
      if (i + 1 <= nx - 1) {
        buf.B.emplace_back(local, d.u(i + 1, j + 1), -hy);
      } else {
        buf.b2[local] += hy * ubar(1.0, yc);
      }
      buf.B.emplace_back(local, d.v(i, j), hx);
      if (j + 1 <= nyf - 1) {
        buf.B.emplace_back(local, d.v(i, j + 1), -hx);
      } else {
        buf.b2[local] += hx * vbar((i + 0.5) * hx, 0.5);
      }
    }
  }
}

void assemble_darcy(const StaggeredGrid& grid, const PhysicalParams& p,
                    const SourceFields& s, AssemblyBuffers& buf) {
  const int nx = grid.spec.nx;
  const int nyp = grid.spec.ny_pm;
  const double hx = grid.hx();
  const double hyp = grid.hy_pm();
  const double mu = p.mu;
  const double tx = (p.kxx / mu) * (hyp / hx);
  const double ty = (p.kyy / mu) * (hx / hyp);
  const double t_if = 2.0 * (p.kyy / mu) * (hx / hyp);  // half-spacing interface link

  for (int jj = 0; jj < nyp; ++jj) {
    for (int i = 0; i < nx; ++i) {
      const int lrow = jj * nx + i;
      const double xc = (i + 0.5) * hx;
      const double yc = -0.5 + (jj + 0.5) * hyp;
      double diag = 0.0;
      double rhs = s.f_pm(xc, yc) * hx * hyp;

      if (i >= 1) {
        diag += tx;
        buf.D.emplace_back(lrow, jj * nx + i - 1, -tx);
      } else {
        diag += 2.0 * tx;
        rhs += 2.0 * tx * s.pbar(0.0, yc);
      }
      if (i <= nx - 2) {
        diag += tx;
        buf.D.emplace_back(lrow, jj * nx + i + 1, -tx);
      } else {
        diag += 2.0 * tx;
        rhs += 2.0 * tx * s.pbar(1.0, yc);
      }
      if (jj >= 1) {
        diag += ty;
        buf.D.emplace_back(lrow, (jj - 1) * nx + i, -ty);
      } else {
        diag += 2.0 * ty;
        rhs += 2.0 * ty * s.pbar(xc, -0.5);
      }
      if (jj <= nyp - 2) {
        diag += ty;
        buf.D.emplace_back(lrow, (jj + 1) * nx + i, -ty);
      } else {
        diag += t_if;
        buf.D.emplace_back(lrow, nyp * nx + i, -t_if);
      }

      buf.D.emplace_back(lrow, lrow, diag);
      buf.b3[lrow] -= rhs;  // monolithic third block row carries -D
    }
  }
}

void assemble_interface_mass(const StaggeredGrid& grid, const PhysicalParams& p,
                             const SourceFields& s, AssemblyBuffers& buf) {
  const int nx = grid.spec.nx;
  const int nyp = grid.spec.ny_pm;
  const double hx = grid.hx();
  const double hyp = grid.hy_pm();
  const double t_if = 2.0 * (p.kyy / p.mu) * (hx / hyp);

  for (const InterfaceDescriptor& c : grid.interface) {
    const int lrow = nyp * nx + c.segment;
    buf.C1.emplace_back(lrow, c.v_P, -hx);
    buf.D.emplace_back(lrow, lrow, t_if);
    buf.D.emplace_back(lrow, (nyp - 1) * nx + c.segment, -t_if);
    buf.b3[lrow] -= hx * s.g_mass(c.x_mid);
  }
}

void assemble_interface_normal_force(const StaggeredGrid& grid, const PhysicalParams& p,
                                     const SourceFields& s, AssemblyBuffers& buf) {
  const int nx = grid.spec.nx;
  const int nyp = grid.spec.ny_pm;
  const double hx = grid.hx();
  const double hy = grid.hy_ff();
  const double mu = p.mu;

  auto ubar = [&](double x, double y) { return s.vbar(x, y)(0); };
  auto vbar = [&](double x, double y) { return s.vbar(x, y)(1); };

  const double c_vv_ns = 2.0 * mu * (hx / hy);
  const double c_lat = 0.5 * mu * (hy / hx);     // half-height E/W faces
  const double c_lat_wall = mu * (hy / hx);      // ghost-doubled at the walls

  for (const InterfaceDescriptor& c : grid.interface) {
    const int row = c.v_P;
    double diag = 0.0;

    // top face
    diag += c_vv_ns;
    if (c.v_N >= 0) {
      buf.A.emplace_back(row, c.v_N, -c_vv_ns);
    } else {
      buf.b1[row] += c_vv_ns * vbar(c.x_mid, 0.5);
    }
    // bottom face carries the normal-force balance: -hx p_pm,P
    buf.C2.emplace_back(nyp * nx + c.segment, row, -hx);
    buf.b1[row] += hx * s.g_bonf(c.x_mid);
    // E face
    if (c.v_E >= 0) {
      diag += c_lat;
      buf.A.emplace_back(row, c.v_E, -c_lat);
      buf.A.emplace_back(row, c.u_ne, -mu);
      buf.A.emplace_back(row, c.u_e, mu);
    } else {
      diag += c_lat_wall;
      buf.b1[row] += c_lat_wall * vbar(1.0, 0.0);
      buf.b1[row] += mu * ubar(1.0, 0.5 * hy) - mu * ubar(1.0, 0.0);
    }
    // W face
    if (c.v_W >= 0) {
      diag += c_lat;
      buf.A.emplace_back(row, c.v_W, -c_lat);
      buf.A.emplace_back(row, c.u_nw, mu);
      buf.A.emplace_back(row, c.u_w, -mu);
    } else {
      diag += c_lat_wall;
      buf.b1[row] += c_lat_wall * vbar(0.0, 0.0);
      buf.b1[row] += -mu * ubar(0.0, 0.5 * hy) + mu * ubar(0.0, 0.0);
    }

    buf.A.emplace_back(row, row, diag);
    buf.b1[row] += 0.5 * hx * hy * s.f_ff(c.x_mid, 0.0)(1);
  }
}

void assemble_interface_tangential(const StaggeredGrid& grid, const PhysicalParams& p,
                                   const SourceFields& s, AssemblyBuffers& buf) {
  const int nx = grid.spec.nx;
  const int nyp = grid.spec.ny_pm;
  const double hx = grid.hx();
  const double hy = grid.hy_ff();
  const double mu = p.mu;
  const double c_half_ns = 2.0 * mu * (hx / hy);
  const double beta = p.alpha / std::sqrt(p.kxx);
  const double gamma = p.alpha * p.kyy / std::sqrt(p.kxx);

  for (const InterfaceDescriptor& c : grid.interface) {
    if (!c.has_tangential_row) continue;
    const int row = c.t_u_P;
    buf.A.emplace_back(row, row, mu * beta * hx + c_half_ns);
    buf.A.emplace_back(row, c.t_u_N, -c_half_ns);
    buf.A.emplace_back(row, c.t_v_w, mu);
    buf.A.emplace_back(row, c.t_v_e, -mu);
    if (p.condition == Condition::BJ) {
      buf.C2.emplace_back(nyp * nx + c.segment - 1, row, -gamma);
      buf.C2.emplace_back(nyp * nx + c.segment, row, gamma);
    }
    buf.b1[row] += mu * beta * hx * s.g_bj(c.x_left);
  }
}

namespace {

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t) {
  SparseMatrix M(rows, cols);
  M.setFromTriplets(t.begin(), t.end());
  M.prune(0.0);
  M.makeCompressed();
  return M;
}

}  // namespace

void rebuild_monolithic(BlockSystem& sys) {
  const int n = sys.n;
  const int m = sys.m;
  const int l = sys.l;
  std::vector<Triplet> t;
  t.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + sys.C1.nonZeros() + sys.C2.nonZeros() +
            sys.D.nonZeros());
  for (int k = 0; k < sys.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.A, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  for (int k = 0; k < sys.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.B, k); it; ++it) {
      t.emplace_back(n + it.row(), it.col(), it.value());
      t.emplace_back(it.col(), n + it.row(), it.value());
    }
  for (int k = 0; k < sys.C1.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.C1, k); it; ++it)
      t.emplace_back(n + m + it.row(), it.col(), it.value());
  for (int k = 0; k < sys.C2.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.C2, k); it; ++it)
      t.emplace_back(it.col(), n + m + it.row(), it.value());
  for (int k = 0; k < sys.D.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.D, k); it; ++it)
      t.emplace_back(n + m + it.row(), n + m + it.col(), -it.value());

  sys.monolithic = from_triplets(n + m + l, n + m + l, t);
  sys.rhs.resize(n + m + l);
  sys.rhs << sys.b1, sys.b2, sys.b3;
}

BlockSystem drop_interface_coupling(BlockSystem sys) {
  sys.C1.setZero();
  sys.C2.setZero();
  rebuild_monolithic(sys);
  return sys;
}

BlockSystem assemble_coupled(const StaggeredGrid& grid, const PhysicalParams& p,
                             const SourceFields& s, int verify) {
  AssemblyBuffers buf = make_buffers(grid);
  assemble_stokes(grid, p, s, buf);
  assemble_darcy(grid, p, s, buf);
  assemble_interface_mass(grid, p, s, buf);
  assemble_interface_normal_force(grid, p, s, buf);
  assemble_interface_tangential(grid, p, s, buf);

  BlockSystem sys;
  sys.grid = grid;
  sys.params = p;
  sys.n = grid.dof.n();
  sys.m = grid.dof.m;
  sys.l = grid.dof.l;
  sys.A = from_triplets(sys.n, sys.n, buf.A);
  sys.B = from_triplets(sys.m, sys.n, buf.B);
  sys.C1 = from_triplets(sys.l, sys.n, buf.C1);
  sys.C2 = from_triplets(sys.l, sys.n, buf.C2);
  sys.D = from_triplets(sys.l, sys.l, buf.D);
  sys.b1 = buf.b1;
  sys.b2 = buf.b2;
  sys.b3 = buf.b3;

  // Component splits of A for the constraint preconditioner and AMG setup.
  {
    const int nu = grid.dof.n_u;
    std::vector<Triplet> t11, t22, t12;
    for (int k = 0; k < sys.A.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(sys.A, k); it; ++it) {
        if (it.row() < nu && it.col() < nu) {
          t11.emplace_back(it.row(), it.col(), it.value());
        } else if (it.row() >= nu && it.col() >= nu) {
          t22.emplace_back(it.row() - nu, it.col() - nu, it.value());
        } else if (it.row() < nu) {
          t12.emplace_back(it.row(), it.col() - nu, it.value());
        }
      }
    }
    sys.A11 = from_triplets(nu, nu, t11);
    sys.A22 = from_triplets(grid.dof.n_v, grid.dof.n_v, t22);
    sys.A12 = from_triplets(nu, grid.dof.n_v, t12);
  }

  rebuild_monolithic(sys);

  const bool run_checks = verify > 0 || (verify < 0 && sys.n + sys.m + sys.l <= 2500);
  if (run_checks) {
    factor_spd(sys.A);  // throws FactorizationError when not SPD
    factor_spd(sys.D);
    DenseMatrix Bd = DenseMatrix(sys.B);
    Eigen::FullPivLU<DenseMatrix> lu(Bd);
    if (lu.rank() < sys.m) {
      throw AssemblyError("assemble_coupled: continuity block is rank deficient (rank " +
                          std::to_string(lu.rank()) + " < " + std::to_string(sys.m) + ")");
    }
    if (p.condition == Condition::BJS) {
      SparseMatrix Mt = SparseMatrix(sys.monolithic.transpose());
      SparseMatrix diff = sys.monolithic - Mt;
      const double asym = diff.coeffs().size() ? diff.coeffs().abs().maxCoeff() : 0.0;
      if (asym != 0.0) {
        throw AssemblyError("assemble_coupled: BJS system is not exactly symmetric (max " +
                            std::to_string(asym) + ")");
      }
    }
  }
  return sys;
}

DarcyVelocity postprocess_darcy_velocity(const StaggeredGrid& grid, const PhysicalParams& p,
                                         const SourceFields& s, const Vector& p_pm) {
  const int nx = grid.spec.nx;
  const int nyp = grid.spec.ny_pm;
  if (p_pm.size() != grid.dof.l) {
    throw ConfigError("postprocess_darcy_velocity: expected slice of length " +
                      std::to_string(grid.dof.l));
  }
  const double hx = grid.hx();
  const double hyp = grid.hy_pm();
  auto cell = [&](int i, int jj) { return p_pm[jj * nx + i]; };
  auto iface = [&](int i) { return p_pm[nyp * nx + i]; };

  DarcyVelocity vel;
  vel.ux.resize(nx + 1, nyp);
  vel.uy.resize(nx, nyp + 1);
  const double cx = p.kxx / p.mu;
  const double cy = p.kyy / p.mu;

  for (int jj = 0; jj < nyp; ++jj) {
    const double yc = -0.5 + (jj + 0.5) * hyp;
    vel.ux(0, jj) = -cx * (cell(0, jj) - s.pbar(0.0, yc)) / (0.5 * hx);
    for (int i = 1; i <= nx - 1; ++i) {
      vel.ux(i, jj) = -cx * (cell(i, jj) - cell(i - 1, jj)) / hx;
    }
    vel.ux(nx, jj) = -cx * (s.pbar(1.0, yc) - cell(nx - 1, jj)) / (0.5 * hx);
  }
  for (int i = 0; i < nx; ++i) {
    const double xc = (i + 0.5) * hx;
    vel.uy(i, 0) = -cy * (cell(i, 0) - s.pbar(xc, -0.5)) / (0.5 * hyp);
    for (int lev = 1; lev <= nyp - 1; ++lev) {
      vel.uy(i, lev) = -cy * (cell(i, lev) - cell(i, lev - 1)) / hyp;
    }
    vel.uy(i, nyp) = -cy * (iface(i) - cell(i, nyp - 1)) / (0.5 * hyp);
  }
  return vel;
}

}  // namespace sd
