#include "sd/precond.hpp"

#include <chrono>
#include <utility>

namespace sd {

namespace {

class ScopedTimer {
 public:
  explicit ScopedTimer(double* out) : out_(out), t0_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    *out_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  double* out_;
  std::chrono::steady_clock::time_point t0_;
};

struct Split {
  int n, m, l;
  Vector r1(const Vector& r) const { return r.head(n); }
  Vector r2(const Vector& r) const { return r.segment(n, m); }
  Vector r3(const Vector& r) const { return r.tail(l); }
  Vector join(const Vector& x1, const Vector& x2, const Vector& x3) const {
    Vector x(n + m + l);
    x << x1, x2, x3;
    return x;
  }
};

// Velocity solve G^-1 (or A^-1) shared by the exact preconditioners: either
// the coupled block or its component-diagonal part.
class VelocitySolve {
 public:
  VelocitySolve() = default;
  static VelocitySolve coupled(const BlockSystem& sys) {
    VelocitySolve vs;
    vs.full_ = factor_spd(sys.A);
    vs.n_u_ = static_cast<int>(sys.A11.rows());
    return vs;
  }
  static VelocitySolve component_diagonal(const BlockSystem& sys) {
    VelocitySolve vs;
    vs.a11_ = factor_spd(sys.A11);
    vs.a22_ = factor_spd(sys.A22);
    vs.n_u_ = static_cast<int>(sys.A11.rows());
    return vs;
  }
  Vector solve(const Vector& r) const {
    if (full_.valid()) return full_.solve(r);
    Vector x(r.size());
    x.head(n_u_) = a11_.solve(r.head(n_u_));
    x.tail(r.size() - n_u_) = a22_.solve(r.tail(r.size() - n_u_));
    return x;
  }

 private:
  SpdFactorization full_, a11_, a22_;
  int n_u_ = 0;
};

class ExactDiag final : public Preconditioner {
 public:
  ExactDiag(const BlockSystem& sys, const PrecondOptions& opts)
      : split_{sys.n, sys.m, sys.l}, B_(sys.B), Bt_(sys.B.transpose()), opts_(opts) {
    ScopedTimer timer(&setup_seconds_);
    A_ = factor_spd(sys.A);
    D_ = factor_spd(sys.D);
  }

  Vector apply(const Vector& r) const override {
    const Vector x1 = A_.solve(split_.r1(r));
    const Vector x2 = -schur_solve(split_.r2(r));
    const Vector x3 = -D_.solve(split_.r3(r));
    return split_.join(x1, x2, x3);
  }

  std::string name() const override { return "diag/exact"; }

 protected:
  Vector schur_solve(const Vector& rhs) const {
    const ApplyFn s = [this](const Vector& q) { return spmv(B_, A_.solve(spmv(Bt_, q))); };
    CgResult res = cg(s, {}, rhs, opts_.schur_tol, opts_.schur_maxit);
    if (!res.converged) {
      throw ConvergenceError("exact Schur solve: CG stalled at relative residual " +
                             std::to_string(res.relative_residual));
    }
    return res.x;
  }

  Split split_;
  SpdFactorization A_, D_;
  SparseMatrix B_, Bt_;
  PrecondOptions opts_;
};

class ExactTri final : public Preconditioner {
 public:
  ExactTri(const BlockSystem& sys, const PrecondOptions& opts)
      : split_{sys.n, sys.m, sys.l}, B_(sys.B), Bt_(sys.B.transpose()), opts_(opts) {
    ScopedTimer timer(&setup_seconds_);
    A_ = factor_spd(sys.A);
    D_ = factor_spd(sys.D);
  }

  Vector apply(const Vector& r) const override {
    const Vector x3 = -D_.solve(split_.r3(r));
    const Vector x2 = -schur_solve(split_.r2(r));
    const Vector x1 = A_.solve(split_.r1(r) - spmv(Bt_, x2));
    return split_.join(x1, x2, x3);
  }

  std::string name() const override { return "tri/exact"; }

 private:
  Vector schur_solve(const Vector& rhs) const {
    const ApplyFn s = [this](const Vector& q) { return spmv(B_, A_.solve(spmv(Bt_, q))); };
    CgResult res = cg(s, {}, rhs, opts_.schur_tol, opts_.schur_maxit);
    if (!res.converged) {
      throw ConvergenceError("exact Schur solve: CG stalled at relative residual " +
                             std::to_string(res.relative_residual));
    }
    return res.x;
  }

  Split split_;
  SpdFactorization A_, D_;
  SparseMatrix B_, Bt_;
  PrecondOptions opts_;
};

class ExactCon final : public Preconditioner {
 public:
  ExactCon(const BlockSystem& sys, const PrecondOptions& opts)
      : split_{sys.n, sys.m, sys.l}, B_(sys.B), Bt_(sys.B.transpose()), opts_(opts) {
    ScopedTimer timer(&setup_seconds_);
    G_ = opts.full_velocity_g ? VelocitySolve::coupled(sys)
                              : VelocitySolve::component_diagonal(sys);
    D_ = factor_spd(sys.D);
    if (sys.m <= opts.dense_schur_cap) {
      DenseMatrix S(sys.m, sys.m);
      for (int j = 0; j < sys.m; ++j) {
        Vector e = Vector::Zero(sys.m);
        e[j] = 1.0;
        S.col(j) = spmv(B_, G_.solve(spmv(Bt_, e)));
      }
      schur_dense_.compute(0.5 * (S + S.transpose()));
      if (schur_dense_.info() != Eigen::Success) {
        throw FactorizationError("con preconditioner: dense Schur factorization failed");
      }
      dense_ready_ = true;
    }
  }

  Vector apply(const Vector& r) const override {
    const Vector w = G_.solve(split_.r1(r));
    const Vector rhs = spmv(B_, w) - split_.r2(r);
    Vector x2;
    if (dense_ready_) {
      x2 = schur_dense_.solve(rhs);
    } else {
      const ApplyFn s = [this](const Vector& q) { return spmv(B_, G_.solve(spmv(Bt_, q))); };
      CgResult res = cg(s, {}, rhs, opts_.schur_tol, opts_.schur_maxit);
      if (!res.converged) {
        throw ConvergenceError("con Schur solve: CG stalled at relative residual " +
                               std::to_string(res.relative_residual));
      }
      x2 = std::move(res.x);
    }
    const Vector x1 = w - G_.solve(spmv(Bt_, x2));
    const Vector x3 = -D_.solve(split_.r3(r));
    return split_.join(x1, x2, x3);
  }

  std::string name() const override { return "con/exact"; }

 private:
  Split split_;
  VelocitySolve G_;
  SpdFactorization D_;
  SparseMatrix B_, Bt_;
  Eigen::LLT<DenseMatrix> schur_dense_;
  bool dense_ready_ = false;
  PrecondOptions opts_;
};

// Shared pieces of the inexact family: one V-cycle per velocity component for
// A^-1 (== G^-1: the cycles only see the diagonal blocks anyway), one V-cycle
// for D^-1, and the constant pressure-mass scaling for S^-1.
struct InexactParts {
  std::unique_ptr<AmgHierarchy> amg_u, amg_v, amg_d;
  int n_u = 0;
  double s_scale = 0;  // S_hat^-1 = s_scale * I

  InexactParts(const BlockSystem& sys, const AmgOptions& amg) {
    amg_u = std::make_unique<AmgHierarchy>(sys.A11, amg);
    amg_v = std::make_unique<AmgHierarchy>(sys.A22, amg);
    amg_d = std::make_unique<AmgHierarchy>(sys.D, amg);
    n_u = static_cast<int>(sys.A11.rows());
    s_scale = 2.0 * sys.params.mu / (sys.grid.hx() * sys.grid.hy_ff());
  }

  Vector velocity(const Vector& r) const {
    Vector x(r.size());
    x.head(n_u) = amg_u->vcycle(r.head(n_u));
    x.tail(r.size() - n_u) = amg_v->vcycle(r.tail(r.size() - n_u));
    return x;
  }
};

class InexactDiag final : public Preconditioner {
 public:
  InexactDiag(const BlockSystem& sys, const PrecondOptions& opts)
      : split_{sys.n, sys.m, sys.l} {
    ScopedTimer timer(&setup_seconds_);
    parts_ = std::make_unique<InexactParts>(sys, opts.amg);
  }

  Vector apply(const Vector& r) const override {
    const Vector x1 = parts_->velocity(split_.r1(r));
    const Vector x2 = -parts_->s_scale * split_.r2(r);
    const Vector x3 = -parts_->amg_d->vcycle(split_.r3(r));
    return split_.join(x1, x2, x3);
  }

  std::string name() const override { return "diag/inexact"; }

 private:
  Split split_;
  std::unique_ptr<InexactParts> parts_;
};

class InexactTri final : public Preconditioner {
 public:
  InexactTri(const BlockSystem& sys, const PrecondOptions& opts)
      : split_{sys.n, sys.m, sys.l}, Bt_(sys.B.transpose()) {
    ScopedTimer timer(&setup_seconds_);
    parts_ = std::make_unique<InexactParts>(sys, opts.amg);
  }

  Vector apply(const Vector& r) const override {
    const Vector x3 = -parts_->amg_d->vcycle(split_.r3(r));
    const Vector x2 = -parts_->s_scale * split_.r2(r);
    const Vector x1 = parts_->velocity(split_.r1(r) - spmv(Bt_, x2));
    return split_.join(x1, x2, x3);
  }

  std::string name() const override { return "tri/inexact"; }

 private:
  Split split_;
  SparseMatrix Bt_;
  std::unique_ptr<InexactParts> parts_;
};

class InexactCon final : public Preconditioner {
 public:
  InexactCon(const BlockSystem& sys, const PrecondOptions& opts)
      : split_{sys.n, sys.m, sys.l}, B_(sys.B), Bt_(sys.B.transpose()), D_(sys.D), opts_(opts) {
    ScopedTimer timer(&setup_seconds_);
    parts_ = std::make_unique<InexactParts>(sys, opts.amg);
  }

  Vector apply(const Vector& r) const override {
    const Vector w = parts_->velocity(split_.r1(r));
    // Schur solve on B G_hat^-1 B^T by CG (the V-cycles make it SPD).
    const ApplyFn s = [this](const Vector& q) {
      return spmv(B_, parts_->velocity(spmv(Bt_, q)));
    };
    CgResult res = cg(s, {}, spmv(B_, w) - split_.r2(r), opts_.inner_tol, opts_.inner_maxit);
    if (!res.converged) {
      throw ConvergenceError("con/inexact Schur solve: inner CG cap " +
                             std::to_string(opts_.inner_maxit) +
                             " exceeded (relative residual " +
                             std::to_string(res.relative_residual) + ")");
    }
    const Vector x2 = std::move(res.x);
    const Vector x1 = w - parts_->velocity(spmv(Bt_, x2));
    // x3 = -D^-1 r3 by AMG-preconditioned CG.
    const ApplyFn dop = [this](const Vector& q) { return spmv(D_, q); };
    CgResult dres = cg(dop, parts_->amg_d->as_operator(), split_.r3(r), opts_.inner_tol,
                       opts_.inner_maxit);
    if (!dres.converged) {
      throw ConvergenceError("con/inexact porous solve: inner CG cap " +
                             std::to_string(opts_.inner_maxit) +
                             " exceeded (relative residual " +
                             std::to_string(dres.relative_residual) + ")");
    }
    return split_.join(x1, x2, -dres.x);
  }

  std::string name() const override { return "con/inexact"; }

 private:
  Split split_;
  SparseMatrix B_;
  SparseMatrix Bt_;
  SparseMatrix D_;
  std::unique_ptr<InexactParts> parts_;
  PrecondOptions opts_;
};

class IdentityPrecond final : public Preconditioner {
 public:
  Vector apply(const Vector& r) const override { return r; }
  std::string name() const override { return "none"; }
};

}  // namespace

std::string to_string(PrecondKind kind) {
  switch (kind) {
    case PrecondKind::None: return "none";
    case PrecondKind::Diag: return "diag";
    case PrecondKind::Tri: return "tri";
    case PrecondKind::Con: return "con";
  }
  return "?";
}

std::string to_string(PrecondMode mode) {
  return mode == PrecondMode::Exact ? "exact" : "inexact";
}

PrecondKind parse_precond_kind(const std::string& s) {
  if (s == "none") return PrecondKind::None;
  if (s == "diag") return PrecondKind::Diag;
  if (s == "tri") return PrecondKind::Tri;
  if (s == "con") return PrecondKind::Con;
  throw ConfigError("unknown preconditioner kind '" + s + "' (expected none|diag|tri|con)");
}

PrecondMode parse_precond_mode(const std::string& s) {
  if (s == "exact") return PrecondMode::Exact;
  if (s == "inexact") return PrecondMode::Inexact;
  throw ConfigError("unknown preconditioner mode '" + s + "' (expected exact|inexact)");
}

ApplyFn Preconditioner::as_operator() const {
  return [this](const Vector& r) { return apply(r); };
}

std::unique_ptr<Preconditioner> make_preconditioner(const BlockSystem& sys,
                                                    const PrecondOptions& opts) {
  if (opts.kind == PrecondKind::None) return std::make_unique<IdentityPrecond>();
  if (opts.mode == PrecondMode::Exact) {
    switch (opts.kind) {
      case PrecondKind::Diag: return std::make_unique<ExactDiag>(sys, opts);
      case PrecondKind::Tri: return std::make_unique<ExactTri>(sys, opts);
      case PrecondKind::Con: return std::make_unique<ExactCon>(sys, opts);
      default: break;
    }
  } else {
    switch (opts.kind) {
      case PrecondKind::Diag: return std::make_unique<InexactDiag>(sys, opts);
      case PrecondKind::Tri: return std::make_unique<InexactTri>(sys, opts);
      case PrecondKind::Con: return std::make_unique<InexactCon>(sys, opts);
      default: break;
    }
  }
  throw ConfigError("make_preconditioner: unsupported kind/mode combination");
}

}  // namespace sd
