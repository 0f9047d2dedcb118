#pragma once

#include <vector>

#include "sd/linalg.hpp"
#include "sd/types.hpp"

namespace sd {

// Settings for the flexible restarted GMRES driver. Convergence is declared
// on the true relative residual |b - A x_s| / |b| (Euclidean), evaluated every
// step from the current LS solution; one iteration = one Arnoldi step (one
// operator and one preconditioner application).
struct SolverConfig {
  int restart = 20;
  double tol = 1e-8;
  int maxit = 2000;
  bool record_history = true;   // residual_history gets one entry per step
  bool record_iterates = false; // iterates gets x_s for every step (memory heavy)
  // Optional SPD weight W defining <x,y> = x . W y for the Arnoldi process;
  // the LS problem then minimizes the W-norm of the residual. Empty = identity.
  ApplyFn inner_product;
};

struct SolveReport {
  Vector x;
  bool converged = false;
  int iterations = 0;
  // residual_history[0] = 1 (x0 = 0); then the true relative residual after
  // each step. In weighted mode these are still Euclidean, for comparability.
  std::vector<double> residual_history;
  std::vector<Vector> iterates;
  double wall_seconds = 0;
};

// Right-preconditioned flexible GMRES with modified Gram-Schmidt and a second
// orthogonalization pass when a step loses more than 1/sqrt(2) of its norm.
// pinv may vary between steps (flexible); pass {} for none. Zero rhs returns
// x = 0, converged. Breakdown (new basis vector numerically zero) finishes the
// cycle early and restarts if unconverged.
SolveReport fgmres(const ApplyFn& op, const ApplyFn& pinv, const Vector& b,
                   const SolverConfig& cfg = {});

struct CgResult {
  Vector x;
  bool converged = false;
  int iterations = 0;
  double relative_residual = 0;
};

// Preconditioned conjugate gradients on an SPD operator; tolerance on
// |r|/|b| with the recurred residual, no final recompute. pinv empty = none.
CgResult cg(const ApplyFn& op, const ApplyFn& pinv, const Vector& b, double tol, int maxit);

}  // namespace sd
