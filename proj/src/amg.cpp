#include "sd/amg.hpp"

#include <cmath>
#include <random>
#include <string>

namespace sd {

namespace {

// Column indices of off-diagonal entries passing the strength test, per row.
std::vector<std::vector<int>> strong_neighbors(const SparseMatrix& A, double threshold) {
  const int n = static_cast<int>(A.rows());
  Vector diag = A.diagonal().cwiseAbs();
  std::vector<std::vector<int>> strong(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      const int j = static_cast<int>(it.col());
      if (j == i) continue;
      const double scale = std::sqrt(diag[i] * diag[j]);
      if (std::abs(it.value()) >= threshold * scale && scale > 0) {
        strong[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  return strong;
}

// Three-phase greedy aggregation over the strength graph: (1) each still-free
// node whose strong neighborhood is entirely free roots a new aggregate and
// absorbs it; (2) leftovers join the strongest adjacent aggregate from phase 1;
// (3) whatever remains roots an aggregate with its free strong neighbors.
std::vector<int> aggregate_nodes(const SparseMatrix& A,
                                 const std::vector<std::vector<int>>& strong, int* count) {
  const int n = static_cast<int>(A.rows());
  std::vector<int> agg(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (agg[static_cast<std::size_t>(i)] != -1) continue;
    bool free_nbhd = true;
    for (int j : strong[static_cast<std::size_t>(i)]) {
      if (agg[static_cast<std::size_t>(j)] != -1) {
        free_nbhd = false;
        break;
      }
    }
    if (!free_nbhd) continue;
    agg[static_cast<std::size_t>(i)] = next;
    for (int j : strong[static_cast<std::size_t>(i)]) agg[static_cast<std::size_t>(j)] = next;
    ++next;
  }
  {
    // Decide phase-2 attachments against the phase-1 state so latecomers do
    // not chain onto each other.
    std::vector<int> phase1 = agg;
    for (int i = 0; i < n; ++i) {
      if (phase1[static_cast<std::size_t>(i)] != -1) continue;
      int best = -1;
      double best_w = -1;
      for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
        const int j = static_cast<int>(it.col());
        if (j == i || phase1[static_cast<std::size_t>(j)] == -1) continue;
        bool is_strong = false;
        for (int sjj : strong[static_cast<std::size_t>(i)]) {
          if (sjj == j) {
            is_strong = true;
            break;
          }
        }
        if (!is_strong) continue;
        if (std::abs(it.value()) > best_w) {
          best_w = std::abs(it.value());
          best = phase1[static_cast<std::size_t>(j)];
        }
      }
      if (best != -1) agg[static_cast<std::size_t>(i)] = best;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (agg[static_cast<std::size_t>(i)] != -1) continue;
    agg[static_cast<std::size_t>(i)] = next;
    for (int j : strong[static_cast<std::size_t>(i)]) {
      if (agg[static_cast<std::size_t>(j)] == -1) agg[static_cast<std::size_t>(j)] = next;
    }
    ++next;
  }
  *count = next;
  return agg;
}

double estimate_jacobi_lambda_max(const SparseMatrix& A, const Vector& inv_diag,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(A.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
  x.normalize();
  double lambda = 1.0;
  for (int it = 0; it < 40; ++it) {
    Vector y = inv_diag.cwiseProduct(spmv(A, x));
    const double nrm = y.norm();
    if (nrm == 0.0) return 1.0;
    lambda = nrm;
    x = y / nrm;
  }
  return lambda;
}

}  // namespace

AmgHierarchy::AmgHierarchy(const SparseMatrix& A, AmgOptions opts) : opts_(opts) {
  if (A.rows() != A.cols()) throw FactorizationError("AmgHierarchy: matrix must be square");
  SparseMatrix current = A;
  level_sizes_.push_back(static_cast<int>(current.rows()));
  while (current.rows() > opts_.coarsest_size &&
         static_cast<int>(levels_.size()) + 1 < opts_.max_levels) {
    const int n = static_cast<int>(current.rows());
    const auto strong = strong_neighbors(current, opts_.strength_threshold);
    int nagg = 0;
    std::vector<int> agg = aggregate_nodes(current, strong, &nagg);
    const double ratio = static_cast<double>(n) / static_cast<double>(nagg);
    if (ratio < opts_.min_coarsening_ratio) {
      throw ConvergenceError("AmgHierarchy: aggregation stagnated on level " +
                             std::to_string(levels_.size()) + " (" + std::to_string(n) + " -> " +
                             std::to_string(nagg) + " nodes, ratio " + std::to_string(ratio) +
                             " < " + std::to_string(opts_.min_coarsening_ratio) + ")");
    }

    Level lv;
    lv.A = current;
    lv.aggregate = agg;
    Vector diag = current.diagonal();
    lv.inv_diag = diag.unaryExpr([](double d) { return d != 0.0 ? 1.0 / d : 0.0; });

    // Tentative prolongator: unit entry per row at the aggregate column.
    SparseMatrix P0(n, nagg);
    {
      std::vector<Triplet> trips;
      trips.reserve(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) trips.emplace_back(i, agg[static_cast<std::size_t>(i)], 1.0);
      P0.setFromTriplets(trips.begin(), trips.end());
    }
    // Smoothing: P = (I - omega D^-1 A) P0.
    const double lmax = estimate_jacobi_lambda_max(current, lv.inv_diag, opts_.seed);
    const double omega = opts_.prolongator_weight / lmax;
    SparseMatrix DinvA = lv.inv_diag.asDiagonal() * current;
    lv.P = P0 - SparseMatrix(omega * (DinvA * P0));
    lv.P.makeCompressed();
    lv.R = SparseMatrix(lv.P.transpose());
    lv.R.makeCompressed();

    SparseMatrix coarse = lv.R * lv.A * lv.P;
    coarse.makeCompressed();
    levels_.push_back(std::move(lv));
    current = std::move(coarse);
    level_sizes_.push_back(static_cast<int>(current.rows()));
  }
  if (current.rows() > opts_.coarsest_size) {
    throw ConvergenceError("AmgHierarchy: max_levels reached with coarsest size " +
                           std::to_string(current.rows()));
  }
  coarse_dense_ = DenseMatrix(current);
  coarse_solver_.compute(coarse_dense_);
  if (coarse_solver_.info() != Eigen::Success) {
    throw FactorizationError("AmgHierarchy: coarsest-level factorization failed");
  }
}

void AmgHierarchy::smooth(const Level& lv, const Vector& r, Vector& x, int sweeps) const {
  for (int s = 0; s < sweeps; ++s) {
    x += opts_.jacobi_weight * lv.inv_diag.cwiseProduct(r - spmv(lv.A, x));
  }
}

void AmgHierarchy::cycle(std::size_t k, const Vector& r, Vector& x) const {
  if (k == levels_.size()) {
    x = coarse_solver_.solve(r);
    return;
  }
  const Level& lv = levels_[k];
  x.setZero(lv.A.rows());
  smooth(lv, r, x, opts_.presmooth_sweeps);
  const Vector rc = spmv(lv.R, r - spmv(lv.A, x));
  Vector xc;
  cycle(k + 1, rc, xc);
  x += spmv(lv.P, xc);
  smooth(lv, r, x, opts_.postsmooth_sweeps);
}

Vector AmgHierarchy::vcycle(const Vector& r) const {
  if (levels_.empty()) return coarse_solver_.solve(r);
  Vector x;
  cycle(0, r, x);
  return x;
}

ApplyFn AmgHierarchy::as_operator() const {
  return [this](const Vector& r) { return vcycle(r); };
}

}  // namespace sd
