#pragma once

#include <functional>

#include "sd/types.hpp"

namespace sd {

// Interface closure for the tangential velocity: BJ couples the free-flow slip
// to the porous-medium pressure gradient (nonsymmetric system); BJS drops that
// coupling (symmetric system).
enum class Condition { BJ, BJS };

// Diagonal permeability tensor K = diag(kxx, kyy); mu is the fluid viscosity,
// alpha the slip coefficient.
struct PhysicalParams {
  double mu = 1e-3;
  double kxx = 1e-2;
  double kyy = 1e-2;
  double alpha = 1.0;
  Condition condition = Condition::BJS;
};

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<Eigen::Vector2d(double, double)>;
using InterfaceField = std::function<double(double)>;

inline ScalarField zero_scalar() {
  return [](double, double) { return 0.0; };
}
inline VectorField zero_vector() {
  return [](double, double) { return Eigen::Vector2d::Zero().eval(); };
}
inline InterfaceField zero_interface() {
  return [](double) { return 0.0; };
}

// Problem data. f_ff / f_pm are volume sources; vbar is the velocity Dirichlet
// datum on the free-flow boundary away from the interface; pbar the pressure
// Dirichlet datum on the porous-medium boundary away from the interface.
// g_mass / g_bonf / g_bj are residuals of the three interface conditions
// (zero for the physical problem; nonzero when a manufactured solution does
// not satisfy the homogeneous coupling):
//   v_ff·n - v_pm·n                          = g_mass  on the interface,
//   -n·T(v_ff,p_ff)·n - p_pm                 = g_bonf  on the interface,
//   (v_ff-v_pm)·tau - sqrt(kxx)/alpha (...)  = g_bj    on the interface.
struct SourceFields {
  VectorField f_ff = zero_vector();
  ScalarField f_pm = zero_scalar();
  VectorField vbar = zero_vector();
  ScalarField pbar = zero_scalar();
  InterfaceField g_mass = zero_interface();
  InterfaceField g_bonf = zero_interface();
  InterfaceField g_bj = zero_interface();
};

}  // namespace sd
