#pragma once

#include <complex>
#include <vector>

#include "sd/krylov.hpp"
#include "sd/precond.hpp"
#include "sd/system.hpp"

namespace sd {

// Natural block-diagonal weight H = blockdiag(A, S, D) with S = B A^-1 B^T.
// The Schur block is held densely (factored once), so H and H^-1 applications
// are exact up to the sparse Cholesky solves; intended for analysis-size grids.
struct WeightH {
  int n = 0, m = 0, l = 0;
  SparseMatrix A, D;
  SpdFactorization A_llt, D_llt;
  DenseMatrix S;
  Eigen::LLT<DenseMatrix> S_llt;

  Vector apply(const Vector& x) const;
  Vector solve(const Vector& r) const;
  ApplyFn solve_op() const;
  double norm(const Vector& x) const;       // |x|_H
  double dual_norm(const Vector& r) const;  // |r|_{H^-1}
};

WeightH make_weight(const BlockSystem& sys);

// Dense realizations used by the pencil computations.
DenseMatrix dense_weight(const WeightH& H);
DenseMatrix dense_weight_inverse(const WeightH& H);
DenseMatrix dense_pdiag(const BlockSystem& sys, const WeightH& H);  // blockdiag(A,-S,-D)
DenseMatrix dense_ptri(const BlockSystem& sys, const WeightH& H);   // + B^T coupling

// P^-1 as a plain operator for spectrum/field-of-values studies. Exact
// diag/tri reuse the dense Schur block of H (pass it when available; built on
// demand otherwise); exact con builds its own dense B G^-1 B^T. Inexact kinds
// wrap make_preconditioner. kind=None returns the identity.
ApplyFn analysis_pinv(const BlockSystem& sys, PrecondKind kind, PrecondMode mode,
                      const WeightH* H = nullptr, bool full_velocity_g = false);

// Dense T = M P^-1 (columnwise) and its eigenvalues.
DenseMatrix dense_right_preconditioned(const BlockSystem& sys, const ApplyFn& pinv);
Spectrum preconditioned_spectrum(const BlockSystem& sys, const ApplyFn& pinv,
                                 int dense_cap = 4000);

struct ClusterStats {
  int total = 0;
  int within = 0;
  double fraction = 0;
  double min_abs = 0;   // min |lambda| over the spectrum
  double max_dist = 0;  // largest distance to the nearest center
};

// Fraction of eigenvalues lying within `radius` of the nearest center.  The
// centers are complex: block-triangular preconditioners cluster the spectrum
// on the real axis, but the block-diagonal ones leave a conjugate pair, so in
// general the cluster set is not real.  Real centers convert implicitly.
ClusterStats cluster_stats(const Spectrum& spectrum,
                           const std::vector<std::complex<double>>& centers, double radius);

// Every eigenvalue lambda of M P_con^-1 either equals 1 (eigenvector with no
// velocity part) or satisfies lambda^2 - (eta+1) lambda + (eta+xi) = 0, where
// eta and xi are bilinear velocity quotients of the eigenvector x:
//   eta = x^T A x / x^T G x,   xi = x^T C^T D^-1 C x / x^T G x.
// Checked on the symmetric-coupling system, where the two coupling blocks
// coincide. max_residual is the largest |quadratic(lambda)| seen.
struct QuadraticCheck {
  int total = 0;
  int lambda_one = 0;  // classified by the lambda = 1 branch
  int quadratic = 0;   // classified by the quadratic identity
  double max_residual = 0;
  double max_lambda_one_dev = 0;
};

QuadraticCheck constraint_quadratic_check(const BlockSystem& sys, bool full_velocity_g = false,
                                          double lambda_one_tol = 1e-6);

// Power iteration on the A-orthogonal projector A^-1 B^T S^-1 B; the returned
// value is |S^-1/2 B A^-1/2|_2, identically 1 whenever B has full row rank.
double projection_norm_surrogate(const BlockSystem& sys, const WeightH& H, int iters = 8,
                                 unsigned seed = 0x5eed);

// Eigenvalues of the congruence representative [[I + X X^T, X],[X^T, I]],
// X = A^-1/2 B^T S^-1/2 (dense square roots; small grids only). With the exact
// Schur complement the spectrum is {(3-sqrt5)/2, 1, (3+sqrt5)/2}, all inside
// the admissible set that also allows 2; X X^T is an orthogonal projector.
struct MbarCheck {
  Vector eigenvalues;
  double max_set_distance = 0;  // to {(3-sqrt5)/2, 1, 2, (3+sqrt5)/2}
  double projector_defect = 0;  // |(XX^T)^2 - XX^T|_2
  bool golden_attained = false; // some eigenvalue within 1e-6 of (3-sqrt5)/2
};

MbarCheck mbar_check(const BlockSystem& sys, const WeightH& H);

// Constants of |M x|_{H^-1} / |N x|_{H^-1}: gamma^2/Gamma^2 are the extreme
// eigenvalues of the pencil (M^T H^-1 M, N^T H^-1 N).
struct EquivalenceConstants {
  double gamma = 0;
  double Gamma = 0;
};

EquivalenceConstants norm_equivalence(const DenseMatrix& M, const DenseMatrix& N,
                                      const DenseMatrix& Hinv);

// Field-of-values constants of T = M P^-1 in the H^-1 inner product:
// gamma = lambda_min((H^-1 T + T^T H^-1)/2, H^-1), Gamma = |T|_{H^-1}.
EquivalenceConstants fov_constants(const BlockSystem& sys, const ApplyFn& pinv,
                                   const WeightH& H);

// Runs one restarted cycle of the H^-1-inner-product GMRES and compares each
// true-residual ratio |r_s|_{H^-1} / |r_0|_{H^-1} against the convergence
// bound (1 - gamma^2/Gamma^2)^{s/2}.
struct ResidualBoundReport {
  std::vector<double> ratios;
  std::vector<double> bounds;
  bool all_pass = false;
};

ResidualBoundReport residual_bound_check(const BlockSystem& sys, const ApplyFn& pinv,
                                         const WeightH& H, double gamma, double Gamma,
                                         int steps = 20);

// |I - A G^-1| in the A^-1-weighted operator norm: the contraction quality of
// the component-diagonal velocity approximation (reported, not asserted).
double rho1_estimate(const BlockSystem& sys);

}  // namespace sd
