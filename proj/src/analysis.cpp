#include "sd/analysis.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <memory>
#include <random>

namespace sd {

namespace {

DenseMatrix dense_schur(const SparseMatrix& B, const SpdFactorization& A_llt) {
  const int m = static_cast<int>(B.rows());
  const SparseMatrix Bt = SparseMatrix(B.transpose());
  DenseMatrix S(m, m);
  for (int j = 0; j < m; ++j) {
    Vector e = Vector::Zero(m);
    e[j] = 1.0;
    S.col(j) = spmv(B, A_llt.solve(spmv(Bt, e)));
  }
  return 0.5 * (S + S.transpose());
}

Eigen::LLT<DenseMatrix> dense_llt(const DenseMatrix& M, const char* what) {
  Eigen::LLT<DenseMatrix> llt(M);
  if (llt.info() != Eigen::Success) {
    throw FactorizationError(std::string(what) + ": dense Cholesky failed (not SPD?)");
  }
  return llt;
}

// Complex matvec through a real sparse matrix, split into parts.
Eigen::VectorXcd spmv_c(const SparseMatrix& M, const Eigen::VectorXcd& x) {
  const Vector re = spmv(M, x.real());
  const Vector im = spmv(M, x.imag());
  return re + std::complex<double>(0, 1) * im;
}

Eigen::VectorXcd solve_c(const SpdFactorization& F, const Eigen::VectorXcd& x) {
  const Vector re = F.solve(x.real());
  const Vector im = F.solve(x.imag());
  return re + std::complex<double>(0, 1) * im;
}

// Transpose pairing a^T b without conjugation.
std::complex<double> bilinear(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return (a.transpose() * b)(0, 0);
}

}  // namespace

Vector WeightH::apply(const Vector& x) const {
  Vector y(n + m + l);
  y.head(n) = spmv(A, x.head(n));
  y.segment(n, m) = S * x.segment(n, m);
  y.tail(l) = spmv(D, x.tail(l));
  return y;
}

Vector WeightH::solve(const Vector& r) const {
  Vector y(n + m + l);
  y.head(n) = A_llt.solve(r.head(n));
  y.segment(n, m) = S_llt.solve(r.segment(n, m));
  y.tail(l) = D_llt.solve(r.tail(l));
  return y;
}

ApplyFn WeightH::solve_op() const {
  return [this](const Vector& r) { return solve(r); };
}

double WeightH::norm(const Vector& x) const {
  const double t = x.dot(apply(x));
  return t > 0 ? std::sqrt(t) : 0.0;
}

double WeightH::dual_norm(const Vector& r) const {
  const double t = r.dot(solve(r));
  return t > 0 ? std::sqrt(t) : 0.0;
}

WeightH make_weight(const BlockSystem& sys) {
  WeightH H;
  H.n = sys.n;
  H.m = sys.m;
  H.l = sys.l;
  H.A = sys.A;
  H.D = sys.D;
  H.A_llt = factor_spd(sys.A);
  H.D_llt = factor_spd(sys.D);
  H.S = dense_schur(sys.B, H.A_llt);
  H.S_llt = dense_llt(H.S, "make_weight Schur block");
  return H;
}

DenseMatrix dense_weight(const WeightH& H) {
  const int N = H.n + H.m + H.l;
  DenseMatrix M = DenseMatrix::Zero(N, N);
  M.topLeftCorner(H.n, H.n) = DenseMatrix(H.A);
  M.block(H.n, H.n, H.m, H.m) = H.S;
  M.bottomRightCorner(H.l, H.l) = DenseMatrix(H.D);
  return M;
}

DenseMatrix dense_weight_inverse(const WeightH& H) {
  const int N = H.n + H.m + H.l;
  DenseMatrix M = DenseMatrix::Zero(N, N);
  {
    DenseMatrix I = DenseMatrix::Identity(H.n, H.n);
    DenseMatrix Ainv(H.n, H.n);
    for (int j = 0; j < H.n; ++j) Ainv.col(j) = H.A_llt.solve(I.col(j));
    M.topLeftCorner(H.n, H.n) = 0.5 * (Ainv + Ainv.transpose());
  }
  {
    DenseMatrix Sinv = H.S_llt.solve(DenseMatrix::Identity(H.m, H.m));
    M.block(H.n, H.n, H.m, H.m) = 0.5 * (Sinv + Sinv.transpose());
  }
  {
    DenseMatrix I = DenseMatrix::Identity(H.l, H.l);
    DenseMatrix Dinv(H.l, H.l);
    for (int j = 0; j < H.l; ++j) Dinv.col(j) = H.D_llt.solve(I.col(j));
    M.bottomRightCorner(H.l, H.l) = 0.5 * (Dinv + Dinv.transpose());
  }
  return M;
}

DenseMatrix dense_pdiag(const BlockSystem& sys, const WeightH& H) {
  const int N = H.n + H.m + H.l;
  DenseMatrix P = DenseMatrix::Zero(N, N);
  P.topLeftCorner(H.n, H.n) = DenseMatrix(sys.A);
  P.block(H.n, H.n, H.m, H.m) = -H.S;
  P.bottomRightCorner(H.l, H.l) = -DenseMatrix(sys.D);
  return P;
}

DenseMatrix dense_ptri(const BlockSystem& sys, const WeightH& H) {
  DenseMatrix P = dense_pdiag(sys, H);
  P.block(0, H.n, H.n, H.m) = DenseMatrix(SparseMatrix(sys.B.transpose()));
  return P;
}

ApplyFn analysis_pinv(const BlockSystem& sys, PrecondKind kind, PrecondMode mode,
                      const WeightH* H, bool full_velocity_g) {
  if (kind == PrecondKind::None) {
    return [](const Vector& r) { return r; };
  }
  if (mode == PrecondMode::Inexact) {
    PrecondOptions opts;
    opts.kind = kind;
    opts.mode = mode;
    opts.full_velocity_g = full_velocity_g;
    std::shared_ptr<Preconditioner> p = make_preconditioner(sys, opts);
    return [p](const Vector& r) { return p->apply(r); };
  }

  struct ExactState {
    int n, m, l;
    SpdFactorization A_llt, A11_llt, A22_llt, D_llt;
    int n_u = 0;
    DenseMatrix S;
    Eigen::LLT<DenseMatrix> S_llt;
    SparseMatrix Bt;

    Vector gsolve(const Vector& r) const {  // velocity solve of the con kind
      if (A_llt.valid()) return A_llt.solve(r);
      Vector x(r.size());
      x.head(n_u) = A11_llt.solve(r.head(n_u));
      x.tail(r.size() - n_u) = A22_llt.solve(r.tail(r.size() - n_u));
      return x;
    }
  };
  auto st = std::make_shared<ExactState>();
  st->n = sys.n;
  st->m = sys.m;
  st->l = sys.l;
  st->Bt = SparseMatrix(sys.B.transpose());

  if (kind == PrecondKind::Con) {
    st->D_llt = factor_spd(sys.D);
    if (full_velocity_g) {
      st->A_llt = factor_spd(sys.A);
    } else {
      st->A11_llt = factor_spd(sys.A11);
      st->A22_llt = factor_spd(sys.A22);
      st->n_u = static_cast<int>(sys.A11.rows());
    }
    {
      DenseMatrix S(sys.m, sys.m);
      for (int j = 0; j < sys.m; ++j) {
        Vector e = Vector::Zero(sys.m);
        e[j] = 1.0;
        S.col(j) = spmv(sys.B, st->gsolve(spmv(st->Bt, e)));
      }
      st->S = 0.5 * (S + S.transpose());
    }
    st->S_llt = dense_llt(st->S, "analysis_pinv con Schur");
    const SparseMatrix B = sys.B;
    return [st, B](const Vector& r) {
      const Vector w = st->gsolve(r.head(st->n));
      const Vector x2 = st->S_llt.solve(spmv(B, w) - r.segment(st->n, st->m));
      Vector x(st->n + st->m + st->l);
      x.head(st->n) = w - st->gsolve(spmv(st->Bt, x2));
      x.segment(st->n, st->m) = x2;
      x.tail(st->l) = -st->D_llt.solve(r.tail(st->l));
      return x;
    };
  }

  // diag / tri: reuse the weight's factorizations when provided.
  if (H != nullptr) {
    st->A_llt = H->A_llt;
    st->D_llt = H->D_llt;
    st->S = H->S;
    st->S_llt = dense_llt(st->S, "analysis_pinv Schur");
  } else {
    st->A_llt = factor_spd(sys.A);
    st->D_llt = factor_spd(sys.D);
    st->S = dense_schur(sys.B, st->A_llt);
    st->S_llt = dense_llt(st->S, "analysis_pinv Schur");
  }
  const bool tri = kind == PrecondKind::Tri;
  return [st, tri](const Vector& r) {
    Vector x(st->n + st->m + st->l);
    const Vector x2 = -st->S_llt.solve(r.segment(st->n, st->m));
    x.segment(st->n, st->m) = x2;
    x.tail(st->l) = -st->D_llt.solve(r.tail(st->l));
    if (tri) {
      x.head(st->n) = st->A_llt.solve(r.head(st->n) - spmv(st->Bt, x2));
    } else {
      x.head(st->n) = st->A_llt.solve(r.head(st->n));
    }
    return x;
  };
}

DenseMatrix dense_right_preconditioned(const BlockSystem& sys, const ApplyFn& pinv) {
  const int N = static_cast<int>(sys.monolithic.rows());
  DenseMatrix T(N, N);
  Vector e = Vector::Zero(N);
  for (int j = 0; j < N; ++j) {
    e[j] = 1.0;
    T.col(j) = spmv(sys.monolithic, pinv(e));
    e[j] = 0.0;
  }
  return T;
}

Spectrum preconditioned_spectrum(const BlockSystem& sys, const ApplyFn& pinv, int dense_cap) {
  return dense_eigenvalues(dense_right_preconditioned(sys, pinv), dense_cap);
}

ClusterStats cluster_stats(const Spectrum& spectrum,
                           const std::vector<std::complex<double>>& centers, double radius) {
  if (centers.empty()) throw ConfigError("cluster_stats: no centers given");
  ClusterStats cs;
  cs.total = static_cast<int>(spectrum.values.size());
  cs.min_abs = cs.total ? std::abs(spectrum.values[0]) : 0.0;
  for (Eigen::Index i = 0; i < spectrum.values.size(); ++i) {
    const std::complex<double> lam = spectrum.values[i];
    double dist = std::abs(lam - centers[0]);
    for (const std::complex<double>& c : centers) dist = std::min(dist, std::abs(lam - c));
    if (dist <= radius) ++cs.within;
    cs.max_dist = std::max(cs.max_dist, dist);
    cs.min_abs = std::min(cs.min_abs, std::abs(lam));
  }
  cs.fraction = cs.total ? static_cast<double>(cs.within) / cs.total : 0.0;
  return cs;
}

QuadraticCheck constraint_quadratic_check(const BlockSystem& sys, bool full_velocity_g,
                                          double lambda_one_tol) {
  const ApplyFn pinv = analysis_pinv(sys, PrecondKind::Con, PrecondMode::Exact, nullptr,
                                     full_velocity_g);
  const DenseMatrix T = dense_right_preconditioned(sys, pinv);
  Eigen::EigenSolver<DenseMatrix> es(T, /*computeEigenvectors=*/true);
  if (es.info() != Eigen::Success) {
    throw FactorizationError("constraint_quadratic_check: eigensolve failed");
  }
  const SpdFactorization D_llt = factor_spd(sys.D);
  const int n = sys.n;
  const int n_u = static_cast<int>(sys.A11.rows());

  QuadraticCheck qc;
  qc.total = static_cast<int>(es.eigenvalues().size());
  for (int k = 0; k < qc.total; ++k) {
    const std::complex<double> lam = es.eigenvalues()[k];
    // Map the eigenvector of M P^-1 back to pencil coordinates z = P^-1 w, so
    // that M z = lambda P z; the identity quotients live on z's velocity part.
    Eigen::VectorXcd w = es.eigenvectors().col(k);
    Eigen::VectorXcd z(w.size());
    {
      const Vector zr = pinv(Vector(w.real()));
      const Vector zi = pinv(Vector(w.imag()));
      z = zr + std::complex<double>(0, 1) * zi;
    }
    const Eigen::VectorXcd x = z.head(n);
    if (x.norm() <= 1e-8 * z.norm()) {
      const double dev = std::abs(lam - 1.0);
      qc.max_lambda_one_dev = std::max(qc.max_lambda_one_dev, dev);
      if (dev <= lambda_one_tol) {
        ++qc.lambda_one;
        continue;
      }
      // No velocity part but far from 1: fall through and let the quadratic
      // residual (with quotients ~0/0 guarded below) record the failure.
    } else if (std::abs(lam - 1.0) <= lambda_one_tol) {
      // Numerically at 1 even though the computed eigenvector carries a
      // velocity part: lambda = 1 is defective here, which makes eigenvectors
      // ill-conditioned and the quotients below meaningless noise.  The
      // identity puts such eigenvalues in the lambda = 1 family anyway
      // (xi = 0 collapses the quadratic to (lambda - 1)^2 = 0).
      qc.max_lambda_one_dev = std::max(qc.max_lambda_one_dev, std::abs(lam - 1.0));
      ++qc.lambda_one;
      continue;
    }
    // Bilinear (non-conjugated) quotients: the identity is algebraic, so it
    // holds with the transpose pairing even for complex eigenvectors.
    std::complex<double> gq;
    if (full_velocity_g) {
      gq = bilinear(x, spmv_c(sys.A, x));
    } else {
      const Eigen::VectorXcd xu = x.head(n_u);
      const Eigen::VectorXcd xv = x.tail(n - n_u);
      gq = bilinear(xu, spmv_c(sys.A11, xu)) + bilinear(xv, spmv_c(sys.A22, xv));
    }
    if (std::abs(gq) < 1e-300) {
      qc.max_residual = std::max(qc.max_residual, std::abs(lam - 1.0));
      continue;
    }
    const std::complex<double> aq = bilinear(x, spmv_c(sys.A, x));
    const Eigen::VectorXcd cx = spmv_c(sys.C1, x);
    const std::complex<double> dq = bilinear(cx, solve_c(D_llt, cx));
    const std::complex<double> eta = aq / gq;
    const std::complex<double> xi = dq / gq;
    const std::complex<double> resid = lam * lam - (eta + 1.0) * lam + (eta + xi);
    qc.max_residual = std::max(qc.max_residual, std::abs(resid));
    ++qc.quadratic;
  }
  return qc;
}

double projection_norm_surrogate(const BlockSystem& sys, const WeightH& H, int iters,
                                 unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector z(sys.n);
  for (int i = 0; i < sys.n; ++i) z[i] = gauss(rng);
  const SparseMatrix Bt = SparseMatrix(sys.B.transpose());
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Vector bz = spmv(sys.B, z);
    const Vector sb = H.S_llt.solve(bz);
    const double num = bz.dot(sb);
    const double den = z.dot(spmv(sys.A, z));
    if (den <= 0) throw FactorizationError("projection_norm_surrogate: A quotient not positive");
    lambda = num / den;
    Vector next = H.A_llt.solve(spmv(Bt, sb));
    const double an = std::sqrt(std::max(next.dot(spmv(sys.A, next)), 1e-300));
    z = next / an;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

MbarCheck mbar_check(const BlockSystem& sys, const WeightH& H) {
  const int n = sys.n;
  const int m = sys.m;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> esa(DenseMatrix(sys.A));
  if (esa.info() != Eigen::Success) {
    throw FactorizationError("mbar_check: velocity eigensolve failed");
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> ess(H.S);
  if (ess.info() != Eigen::Success) {
    throw FactorizationError("mbar_check: Schur eigensolve failed");
  }
  if (esa.eigenvalues().minCoeff() <= 0 || ess.eigenvalues().minCoeff() <= 0) {
    throw FactorizationError("mbar_check: blocks are not positive definite");
  }
  const DenseMatrix Ainv_h = esa.operatorInverseSqrt();
  const DenseMatrix Sinv_h = ess.operatorInverseSqrt();
  const DenseMatrix X = Ainv_h * DenseMatrix(SparseMatrix(sys.B.transpose())) * Sinv_h;
  const DenseMatrix Pi = X * X.transpose();

  DenseMatrix Mbar(n + m, n + m);
  Mbar.topLeftCorner(n, n) = DenseMatrix::Identity(n, n) + Pi;
  Mbar.topRightCorner(n, m) = X;
  Mbar.bottomLeftCorner(m, n) = X.transpose();
  Mbar.bottomRightCorner(m, m) = DenseMatrix::Identity(m, m);

  Eigen::SelfAdjointEigenSolver<DenseMatrix> esm(Mbar, Eigen::EigenvaluesOnly);
  MbarCheck mc;
  mc.eigenvalues = esm.eigenvalues();

  const double s5 = std::sqrt(5.0);
  const double set[4] = {(3.0 - s5) / 2.0, 1.0, 2.0, (3.0 + s5) / 2.0};
  for (Eigen::Index i = 0; i < mc.eigenvalues.size(); ++i) {
    double dist = std::abs(mc.eigenvalues[i] - set[0]);
    for (double c : set) dist = std::min(dist, std::abs(mc.eigenvalues[i] - c));
    mc.max_set_distance = std::max(mc.max_set_distance, dist);
    if (std::abs(mc.eigenvalues[i] - set[0]) <= 1e-6) mc.golden_attained = true;
  }
  {
    Eigen::SelfAdjointEigenSolver<DenseMatrix> esd(Pi * Pi - Pi, Eigen::EigenvaluesOnly);
    mc.projector_defect = esd.eigenvalues().cwiseAbs().maxCoeff();
  }
  return mc;
}

EquivalenceConstants norm_equivalence(const DenseMatrix& M, const DenseMatrix& N,
                                      const DenseMatrix& Hinv) {
  const DenseMatrix HM = Hinv * M;
  const DenseMatrix HN = Hinv * N;
  DenseMatrix num = M.transpose() * HM;
  DenseMatrix den = N.transpose() * HN;
  num = 0.5 * (num + num.transpose()).eval();
  den = 0.5 * (den + den.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(num, den,
                                                            Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) {
    throw FactorizationError("norm_equivalence: generalized eigensolve failed");
  }
  EquivalenceConstants ec;
  ec.gamma = std::sqrt(std::max(ges.eigenvalues().minCoeff(), 0.0));
  ec.Gamma = std::sqrt(std::max(ges.eigenvalues().maxCoeff(), 0.0));
  return ec;
}

EquivalenceConstants fov_constants(const BlockSystem& sys, const ApplyFn& pinv,
                                   const WeightH& H) {
  const DenseMatrix T = dense_right_preconditioned(sys, pinv);
  const DenseMatrix Hinv = dense_weight_inverse(H);
  const DenseMatrix HT = Hinv * T;
  DenseMatrix sym = 0.5 * (HT + HT.transpose());
  EquivalenceConstants ec;
  {
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(
        sym, Hinv, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success) {
      throw FactorizationError("fov_constants: symmetric-part eigensolve failed");
    }
    ec.gamma = ges.eigenvalues().minCoeff();
  }
  {
    DenseMatrix num = T.transpose() * HT;
    num = 0.5 * (num + num.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(
        num, Hinv, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (ges.info() != Eigen::Success) {
      throw FactorizationError("fov_constants: norm eigensolve failed");
    }
    ec.Gamma = std::sqrt(std::max(ges.eigenvalues().maxCoeff(), 0.0));
  }
  return ec;
}

ResidualBoundReport residual_bound_check(const BlockSystem& sys, const ApplyFn& pinv,
                                         const WeightH& H, double gamma, double Gamma,
                                         int steps) {
  SolverConfig cfg;
  cfg.restart = steps;
  cfg.maxit = steps;
  cfg.tol = 1e-30;  // run the full cycle; the bound is checked per step below
  cfg.record_iterates = true;
  cfg.inner_product = H.solve_op();
  const ApplyFn op = [&sys](const Vector& x) { return spmv(sys.monolithic, x); };
  const SolveReport rep = fgmres(op, pinv, sys.rhs, cfg);

  ResidualBoundReport rb;
  const double r0 = H.dual_norm(sys.rhs);
  if (r0 == 0) throw ConfigError("residual_bound_check: zero right-hand side");
  const double base = std::max(0.0, 1.0 - (gamma * gamma) / (Gamma * Gamma));
  rb.all_pass = true;
  for (std::size_t s = 0; s < rep.iterates.size(); ++s) {
    const Vector r = sys.rhs - spmv(sys.monolithic, rep.iterates[s]);
    const double ratio = H.dual_norm(r) / r0;
    const double bound = std::pow(base, 0.5 * static_cast<double>(s + 1));
    rb.ratios.push_back(ratio);
    rb.bounds.push_back(bound);
    if (ratio > bound * (1.0 + 1e-8) + 1e-12) rb.all_pass = false;
  }
  if (rb.ratios.empty()) rb.all_pass = false;
  return rb;
}

double rho1_estimate(const BlockSystem& sys) {
  const int n = sys.n;
  const int n_u = static_cast<int>(sys.A11.rows());
  const SpdFactorization A_llt = factor_spd(sys.A);
  const SpdFactorization A11_llt = factor_spd(sys.A11);
  const SpdFactorization A22_llt = factor_spd(sys.A22);

  DenseMatrix M(n, n);  // I - A G^-1, columnwise
  Vector e = Vector::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    Vector g(n);
    g.head(n_u) = A11_llt.solve(e.head(n_u));
    g.tail(n - n_u) = A22_llt.solve(e.tail(n - n_u));
    M.col(j) = e - spmv(sys.A, g);
    e[j] = 0.0;
  }
  DenseMatrix Ainv(n, n);
  {
    DenseMatrix I = DenseMatrix::Identity(n, n);
    for (int j = 0; j < n; ++j) Ainv.col(j) = A_llt.solve(I.col(j));
    Ainv = 0.5 * (Ainv + Ainv.transpose()).eval();
  }
  DenseMatrix num = M.transpose() * Ainv * M;
  num = 0.5 * (num + num.transpose()).eval();
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix> ges(num, Ainv,
                                                            Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
  if (ges.info() != Eigen::Success) {
    throw FactorizationError("rho1_estimate: generalized eigensolve failed");
  }
  return std::sqrt(std::max(ges.eigenvalues().maxCoeff(), 0.0));
}

}  // namespace sd
