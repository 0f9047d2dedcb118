#pragma once

#include <Eigen/SparseCholesky>

#include <complex>
#include <functional>
#include <memory>
#include <string>

#include "sd/types.hpp"

namespace sd {

using ApplyFn = std::function<Vector(const Vector&)>;

Vector spmv(const SparseMatrix& M, const Vector& x);

// Sparse Cholesky handle for an SPD matrix; cheap to copy.
class SpdFactorization {
 public:
  SpdFactorization() = default;
  int dim() const { return dim_; }
  bool valid() const { return static_cast<bool>(llt_); }
  Vector solve(const Vector& b) const;

 private:
  friend SpdFactorization factor_spd(const SparseMatrix& M);
  std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
  int dim_ = 0;
};

// Verifies symmetry, then factors. Throws FactorizationError when the input is
// not symmetric or a pivot is non-positive (not SPD).
SpdFactorization factor_spd(const SparseMatrix& M);

inline Vector solve_spd(const SpdFactorization& F, const Vector& b) { return F.solve(b); }

struct Spectrum {
  Eigen::VectorXcd values;
  std::string source;  // "dense"
};

// Full nonsymmetric eigensolve (Hessenberg reduction + implicitly shifted QR).
// Dense-only by design; dim capped (default 4000). Each returned spectrum has
// passed a backward-error check: for five seeded random eigenvalues, an
// inverse-iteration eigenvector v satisfies |Mv - lambda v| <= 1e-7 |M| (the
// threshold allows the ~sqrt(eps) accuracy floor of defective eigenvalues).
Spectrum dense_eigenvalues(const DenseMatrix& M, int dense_cap = 4000);

struct OperatorNormOpts {
  // Transpose apply for nonsymmetric operators; when absent the operator is
  // assumed self-adjoint and the normal operator is formed as F(F(x)).
  ApplyFn transpose_apply;
  double tol = 1e-10;
  int maxit = 1000;
  unsigned seed = 0x5eed;
};

// Spectral norm via power iteration on the normal operator.
double operator_norm2(const ApplyFn& apply, int dim, const OperatorNormOpts& opts = {});

// Coordinate-format sparse exchange files ("%%MatrixMarket matrix coordinate
// real general" banner, 1-based triplets).
void write_matrix_market(const std::string& path, const SparseMatrix& M);
SparseMatrix read_matrix_market(const std::string& path);

}  // namespace sd
