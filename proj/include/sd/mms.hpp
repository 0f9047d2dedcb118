#pragma once

#include "sd/grid.hpp"
#include "sd/params.hpp"
#include "sd/system.hpp"
#include "sd/types.hpp"

namespace sd {

// Closed-form benchmark solution on the coupled domain:
//
//   u    = -cos(pi x) sin(pi y)          (free-flow velocity, divergence free)
//   v    =  sin(pi x) cos(pi y)
//   p_ff =  y sin(pi x) / 2
//   p_pm =  y^2 sin(pi x) / 2
//
// Both pressures vanish on the interface y = 0 and v is continuous across it,
// so the normal-force and tangential interface conditions hold exactly
// (g_bonf = g_bj = 0) while mass conservation carries the defect
// g_mass = sin(pi x) because the porous filtration velocity does not match v.
class ManufacturedSolution {
 public:
  explicit ManufacturedSolution(const PhysicalParams& params) : p_(params) {}

  const PhysicalParams& params() const { return p_; }

  double u(double x, double y) const;
  double v(double x, double y) const;
  double p_ff(double x, double y) const;
  double p_pm(double x, double y) const;

  // Filtration velocity -K/mu grad p_pm in the porous medium.
  Eigen::Vector2d darcy_velocity(double x, double y) const;

  // Volume and boundary data that reproduce the fields above.
  SourceFields sources() const;

 private:
  PhysicalParams p_;
};

// Exact fields sampled at every unknown of the grid, in solver ordering.
Vector exact_interpolant(const StaggeredGrid& grid, const ManufacturedSolution& mms);

// Control-volume-weighted discrete L2 errors of a solution vector against the
// exact fields. Velocity combines both components; interface unknowns carry
// half cells.
struct FieldErrors {
  double velocity = 0;
  double p_ff = 0;
  double p_pm = 0;
};

FieldErrors discrete_errors(const StaggeredGrid& grid, const ManufacturedSolution& mms,
                            const Vector& solution);

}  // namespace sd
