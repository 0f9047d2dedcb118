#pragma once

#include <memory>
#include <string>

#include "sd/amg.hpp"
#include "sd/krylov.hpp"
#include "sd/system.hpp"

namespace sd {

// Block preconditioners for the monolithic system [[A,B^T,C2^T],[B,0,0],[C1,0,-D]].
//
//   diag: blockdiag(A, -S, -D),          S = B A^-1 B^T
//   tri:  [[A,B^T,0],[0,-S,0],[0,0,-D]]  (upper triangular, back substitution)
//   con:  [[G,B^T,0],[B,0,0],[0,0,-D]]   (constraint form; G = blockdiag(A11,A22))
//
// Exact mode inverts A, G and D by sparse Cholesky and the Schur complements
// by inner CG (S) or a dense factorization (B G^-1 B^T, while the pressure
// count stays below dense_schur_cap). Inexact mode replaces A^-1 and G^-1 by
// one AMG V-cycle per velocity component, D^-1 by one V-cycle, S^-1 by the
// pressure-mass scaling 2 mu / (hx hy), and the con Schur solves by inner CG
// with loose tolerance.
enum class PrecondKind { None, Diag, Tri, Con };
enum class PrecondMode { Exact, Inexact };

std::string to_string(PrecondKind kind);
std::string to_string(PrecondMode mode);
PrecondKind parse_precond_kind(const std::string& s);  // ConfigError on unknown
PrecondMode parse_precond_mode(const std::string& s);

struct PrecondOptions {
  PrecondKind kind = PrecondKind::Tri;
  PrecondMode mode = PrecondMode::Exact;
  // Exact mode: inner CG tolerance/cap for S = B A^-1 B^T solves, and the
  // largest pressure count for which the con Schur complement B G^-1 B^T is
  // formed and factored densely (above it: inner CG at schur_tol).
  double schur_tol = 1e-10;
  int schur_maxit = 10000;
  int dense_schur_cap = 6000;
  // Inexact mode: inner CG settings for the con Schur solves. Exhausting the
  // cap raises ConvergenceError.
  double inner_tol = 1e-6;
  int inner_maxit = 500;
  // Testing hook: use the full velocity block as G instead of its
  // component-diagonal part (makes the velocity Rayleigh quotients 1).
  bool full_velocity_g = false;
  AmgOptions amg;
};

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Vector apply(const Vector& r) const = 0;  // x = P^-1 r
  virtual std::string name() const = 0;             // e.g. "tri/exact"
  double setup_seconds() const { return setup_seconds_; }
  ApplyFn as_operator() const;

 protected:
  double setup_seconds_ = 0;
};

std::unique_ptr<Preconditioner> make_preconditioner(const BlockSystem& sys,
                                                    const PrecondOptions& opts = {});

}  // namespace sd
