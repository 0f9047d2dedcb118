#include "sd/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace sd {

Vector spmv(const SparseMatrix& M, const Vector& x) {
  if (M.cols() != x.size()) {
    throw ConfigError("spmv: dimension mismatch (" + std::to_string(M.cols()) + " vs " +
                      std::to_string(x.size()) + ")");
  }
  return M * x;
}

Vector SpdFactorization::solve(const Vector& b) const {
  if (!llt_) throw FactorizationError("solve_spd: factorization is empty");
  if (b.size() != dim_) throw FactorizationError("solve_spd: dimension mismatch");
  return llt_->solve(b);
}

SpdFactorization factor_spd(const SparseMatrix& M) {
  if (M.rows() != M.cols()) throw FactorizationError("factor_spd: matrix is not square");
  SparseMatrix Mt = SparseMatrix(M.transpose());
  const double scale = M.coeffs().size() ? M.coeffs().abs().maxCoeff() : 0.0;
  SparseMatrix diff = M - Mt;
  const double asym = diff.coeffs().size() ? diff.coeffs().abs().maxCoeff() : 0.0;
  if (asym > 1e-10 * std::max(scale, 1e-300)) {
    throw FactorizationError("factor_spd: matrix is not symmetric (max asymmetry " +
                             std::to_string(asym) + ")");
  }
  SpdFactorization F;
  F.llt_ = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
  Eigen::SparseMatrix<double> Mc(M);
  F.llt_->compute(Mc);
  if (F.llt_->info() != Eigen::Success) {
    throw FactorizationError("factor_spd: non-positive pivot, matrix is not SPD");
  }
  F.dim_ = static_cast<int>(M.rows());
  return F;
}

namespace {

// One inverse-iteration step from a seeded start refines (lambda, v); the
// residual certifies the eigenvalue backward error.
void backward_error_check(const DenseMatrix& M, const Eigen::VectorXcd& values) {
  const int n = static_cast<int>(M.rows());
  if (n == 0) return;
  const double norm_m = std::max(M.norm(), 1e-300);
  std::mt19937 rng(0xe16e);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int checks = std::min(5, n);
  for (int c = 0; c < checks; ++c) {
    const std::complex<double> lambda = values[pick(rng)];
    // Tiny shift keeps the shifted matrix invertible at a true eigenvalue.
    const std::complex<double> shift =
        lambda + std::complex<double>(1e-12 * norm_m, 1e-14 * norm_m);
    Eigen::MatrixXcd S = M.cast<std::complex<double>>();
    S.diagonal().array() -= shift;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(S);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = std::complex<double>(gauss(rng), gauss(rng));
    v.normalize();
    for (int it = 0; it < 4; ++it) {
      v = lu.solve(v);
      v.normalize();
    }
    // Defective eigenvalues cap the attainable accuracy near sqrt(eps), so the
    // acceptance threshold sits above that floor rather than at roundoff.
    const double resid = (M.cast<std::complex<double>>() * v - lambda * v).norm();
    if (!(resid <= 1e-7 * norm_m)) {
      throw FactorizationError("dense_eigenvalues: backward error check failed for lambda = (" +
                               std::to_string(lambda.real()) + ", " + std::to_string(lambda.imag()) +
                               "), residual " + std::to_string(resid));
    }
  }
}

}  // namespace

Spectrum dense_eigenvalues(const DenseMatrix& M, int dense_cap) {
  if (M.rows() != M.cols()) throw ConfigError("dense_eigenvalues: matrix is not square");
  if (M.rows() > dense_cap) {
    throw ConfigError("dense_eigenvalues: dimension " + std::to_string(M.rows()) +
                      " exceeds the dense cap " + std::to_string(dense_cap) +
                      "; use a smaller grid");
  }
  Eigen::EigenSolver<DenseMatrix> solver(M, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw FactorizationError("dense_eigenvalues: QR iteration failed to converge on a " +
                             std::to_string(M.rows()) + "-dim Schur block");
  }
  Spectrum s;
  s.values = solver.eigenvalues();
  s.source = "dense";
  backward_error_check(M, s.values);
  return s;
}

double operator_norm2(const ApplyFn& apply, int dim, const OperatorNormOpts& opts) {
  if (dim <= 0) throw ConfigError("operator_norm2: dimension must be positive");
  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x(dim);
  for (int i = 0; i < dim; ++i) x[i] = gauss(rng);
  x.normalize();
  double sigma2 = 0.0;
  double prev = -1.0;
  for (int it = 0; it < opts.maxit; ++it) {
    Vector y = apply(x);
    Vector z = opts.transpose_apply ? opts.transpose_apply(y) : apply(y);
    sigma2 = x.dot(z);  // Rayleigh quotient of the normal operator
    const double nz = z.norm();
    if (nz == 0.0) return 0.0;  // operator annihilates the Krylov direction
    x = z / nz;
    if (it > 0 && std::abs(sigma2 - prev) <= opts.tol * std::max(std::abs(sigma2), 1e-300)) {
      return std::sqrt(std::max(sigma2, 0.0));
    }
    prev = sigma2;
  }
  throw ConvergenceError("operator_norm2: power iteration cap " + std::to_string(opts.maxit) +
                         " reached; last two estimates " + std::to_string(prev) + " and " +
                         std::to_string(sigma2));
}

void write_matrix_market(const std::string& path, const SparseMatrix& M) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_matrix_market: cannot open " + path);
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
  char buf[64];
  for (int k = 0; k < M.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(M, k); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.17g", it.value());
      out << it.row() + 1 << " " << it.col() + 1 << " " << buf << "\n";
    }
  }
  if (!out) throw ConfigError("write_matrix_market: write failed for " + path);
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_matrix_market: cannot open " + path);
  std::string line;
  int lineno = 0;
  // Banner
  if (!std::getline(in, line)) throw ConfigError("read_matrix_market: empty file " + path);
  ++lineno;
  if (line.rfind("%%MatrixMarket", 0) != 0 || line.find("coordinate") == std::string::npos ||
      line.find("real") == std::string::npos || line.find("general") == std::string::npos) {
    throw ConfigError("read_matrix_market: unsupported banner at line 1: " + line);
  }
  auto next_data_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line[0] != '%') return true;
    }
    return false;
  };
  if (!next_data_line()) throw ConfigError("read_matrix_market: missing dimension line");
  long rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
      throw ConfigError("read_matrix_market: malformed dimension line " + std::to_string(lineno) +
                        ": " + line);
    }
  }
  std::vector<Triplet> trips;
  trips.reserve(static_cast<size_t>(nnz));
  for (long e = 0; e < nnz; ++e) {
    if (!next_data_line()) {
      throw ConfigError("read_matrix_market: expected " + std::to_string(nnz) +
                        " entries, file ended after " + std::to_string(e));
    }
    std::istringstream ss(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v) || i < 1 || j < 1 || i > rows || j > cols) {
      throw ConfigError("read_matrix_market: malformed entry at line " + std::to_string(lineno) +
                        ": " + line);
    }
    trips.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  SparseMatrix M(rows, cols);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

}  // namespace sd
