#include "sd/krylov.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <numbers>

namespace sd {

namespace {

// Arnoldi workspace for one cycle. In weighted mode every basis vector keeps
// its W-image alongside, so each step needs exactly one weight application
// (for the new candidate); projections update both copies linearly.
struct Basis {
  std::vector<Vector> v;   // W-orthonormal basis
  std::vector<Vector> wv;  // W * v (aliases v when unweighted)
  bool weighted = false;

  void clear() {
    v.clear();
    wv.clear();
  }
  void push(Vector vec, Vector wvec) {
    v.push_back(std::move(vec));
    if (weighted) wv.push_back(std::move(wvec));
  }
  const Vector& w(std::size_t i) const { return weighted ? wv[i] : v[i]; }
};

double safe_sqrt(double t) { return t > 0 ? std::sqrt(t) : 0.0; }

}  // namespace

SolveReport fgmres(const ApplyFn& op, const ApplyFn& pinv, const Vector& b,
                   const SolverConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  if (cfg.restart < 1) throw ConfigError("fgmres: restart must be >= 1");
  if (cfg.tol <= 0) throw ConfigError("fgmres: tol must be positive");

  const Eigen::Index N = b.size();
  SolveReport rep;
  rep.x = Vector::Zero(N);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    if (cfg.record_history) rep.residual_history.push_back(0.0);
    rep.wall_seconds = elapsed();
    return rep;
  }
  if (cfg.record_history) rep.residual_history.push_back(1.0);

  const bool weighted = static_cast<bool>(cfg.inner_product);
  Basis basis;
  basis.weighted = weighted;
  std::vector<Vector> z;             // preconditioned directions, x_s = x0 + Z y
  DenseMatrix H;                     // (restart+1) x restart Hessenberg
  Vector rhs_ls;                     // |r0|_W e1

  Vector x = rep.x;
  bool done = false;
  while (!done && rep.iterations < cfg.maxit) {
    Vector r = b - op(x);
    Vector wr = weighted ? cfg.inner_product(r) : Vector();
    const double r0 = weighted ? safe_sqrt(r.dot(wr)) : r.norm();
    if (r0 == 0.0) {
      rep.converged = true;
      break;
    }
    basis.clear();
    z.clear();
    basis.push(r / r0, weighted ? Vector(wr / r0) : Vector());
    H = DenseMatrix::Zero(cfg.restart + 1, cfg.restart);
    rhs_ls = Vector::Zero(cfg.restart + 1);
    rhs_ls[0] = r0;

    int s = 0;  // steps completed in this cycle
    while (s < cfg.restart && rep.iterations < cfg.maxit) {
      const Vector& vs = basis.v[static_cast<std::size_t>(s)];
      Vector zs = pinv ? pinv(vs) : vs;
      Vector w = op(zs);
      z.push_back(std::move(zs));
      Vector ww = weighted ? cfg.inner_product(w) : Vector();

      const double before = weighted ? safe_sqrt(w.dot(ww)) : w.norm();
      for (int i = 0; i <= s; ++i) {
        const double hij = basis.w(static_cast<std::size_t>(i)).dot(w);
        H(i, s) = hij;
        w -= hij * basis.v[static_cast<std::size_t>(i)];
        if (weighted) ww -= hij * basis.wv[static_cast<std::size_t>(i)];
      }
      double hnew = weighted ? safe_sqrt(w.dot(ww)) : w.norm();
      if (hnew < before / std::numbers::sqrt2) {  // re-orthogonalize on heavy cancellation
        for (int i = 0; i <= s; ++i) {
          const double corr = basis.w(static_cast<std::size_t>(i)).dot(w);
          H(i, s) += corr;
          w -= corr * basis.v[static_cast<std::size_t>(i)];
          if (weighted) ww -= corr * basis.wv[static_cast<std::size_t>(i)];
        }
        hnew = weighted ? safe_sqrt(w.dot(ww)) : w.norm();
      }
      H(s + 1, s) = hnew;
      const bool breakdown = !(hnew > r0 * 1e-14);

      ++s;
      ++rep.iterations;

      // Current LS solution and its true residual.
      const Vector y = H.topLeftCorner(s + 1, s)
                           .colPivHouseholderQr()
                           .solve(rhs_ls.head(s + 1))
                           .eval();
      Vector xs = x;
      for (int i = 0; i < s; ++i) xs += y[i] * z[static_cast<std::size_t>(i)];
      const double rel = (b - op(xs)).norm() / bnorm;
      if (cfg.record_history) rep.residual_history.push_back(rel);
      if (cfg.record_iterates) rep.iterates.push_back(xs);
      if (rel <= cfg.tol) {
        x = std::move(xs);
        rep.converged = true;
        done = true;
        break;
      }
      if (breakdown) {
        // Exact Krylov span reached but the W- and Euclidean-norm residuals
        // disagree on the tolerance; restart from the best point available.
        x = std::move(xs);
        break;
      }
      if (s == cfg.restart || rep.iterations == cfg.maxit) {
        x = std::move(xs);
        break;
      }
      basis.push(w / hnew, weighted ? Vector(ww / hnew) : Vector());
    }
  }
  rep.x = std::move(x);
  rep.wall_seconds = elapsed();
  return rep;
}

CgResult cg(const ApplyFn& op, const ApplyFn& pinv, const Vector& b, double tol, int maxit) {
  CgResult res;
  const Eigen::Index N = b.size();
  res.x = Vector::Zero(N);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  Vector r = b;
  Vector zv = pinv ? pinv(r) : r;
  Vector p = zv;
  double rz = r.dot(zv);
  for (int it = 0; it < maxit; ++it) {
    const Vector ap = op(p);
    const double pap = p.dot(ap);
    if (!(pap > 0)) {
      throw FactorizationError("cg: operator not positive definite (p.Ap = " +
                               std::to_string(pap) + ")");
    }
    const double alpha = rz / pap;
    res.x += alpha * p;
    r -= alpha * ap;
    ++res.iterations;
    res.relative_residual = r.norm() / bnorm;
    if (res.relative_residual <= tol) {
      res.converged = true;
      return res;
    }
    zv = pinv ? pinv(r) : r;
    const double rz_new = r.dot(zv);
    p = zv + (rz_new / rz) * p;
    rz = rz_new;
  }
  return res;
}

}  // namespace sd
