#pragma once

#include <Eigen/Cholesky>
#include <cstdint>
#include <vector>

#include "sd/linalg.hpp"
#include "sd/types.hpp"

namespace sd {

struct AmgOptions {
  // Strength of connection: |a_ij| >= threshold * sqrt(|a_ii a_jj|).
  double strength_threshold = 0.08;
  // Prolongator smoothing P = (I - omega D^-1 A) P0 with
  // omega = prolongator_weight / lambda_max(D^-1 A) (power-iteration estimate).
  double prolongator_weight = 4.0 / 3.0;
  double jacobi_weight = 2.0 / 3.0;
  int presmooth_sweeps = 1;
  int postsmooth_sweeps = 1;
  int coarsest_size = 200;  // levels at or below this are solved densely
  int max_levels = 25;
  // A level must shrink by at least this factor, else setup aborts
  // (ConvergenceError) rather than building a useless hierarchy.
  double min_coarsening_ratio = 1.2;
  std::uint64_t seed = 0x5eed;
};

// Smoothed-aggregation hierarchy for an SPD matrix. One symmetric V-cycle
// (damped-Jacobi pre/post smoothing, Galerkin coarse operators R = P^T,
// dense factorization on the coarsest level) applied to a residual with zero
// initial guess; as such the cycle is a fixed SPD operator, usable as a
// preconditioner for CG and inside block preconditioners.
class AmgHierarchy {
 public:
  explicit AmgHierarchy(const SparseMatrix& A, AmgOptions opts = {});

  // x = V-cycle(r), zero initial guess. Linear and symmetric in r.
  Vector vcycle(const Vector& r) const;
  ApplyFn as_operator() const;

  int levels() const { return static_cast<int>(level_sizes_.size()); }
  const std::vector<int>& level_sizes() const { return level_sizes_; }
  // Aggregate index of each fine node on level k (the tentative prolongator
  // has exactly one unit entry per row, at this column).
  const std::vector<int>& aggregates(int k) const { return levels_[k].aggregate; }

 private:
  struct Level {
    SparseMatrix A;
    SparseMatrix P;
    SparseMatrix R;
    Vector inv_diag;
    std::vector<int> aggregate;
  };

  void smooth(const Level& lv, const Vector& r, Vector& x, int sweeps) const;
  void cycle(std::size_t k, const Vector& r, Vector& x) const;

  std::vector<Level> levels_;  // all levels that restrict further
  DenseMatrix coarse_dense_;
  Eigen::LDLT<DenseMatrix> coarse_solver_;
  std::vector<int> level_sizes_;
  AmgOptions opts_;
};

}  // namespace sd
