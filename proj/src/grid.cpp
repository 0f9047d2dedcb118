#include "sd/grid.hpp"

#include <cmath>

namespace sd {

GridSpec square_grid(int nx) {
  if (nx < 2 || nx % 2 != 0) {
    throw GridError("square_grid: nx must be even and >= 2, got " + std::to_string(nx));
  }
  return GridSpec{nx, nx / 2, nx / 2};
}

DofCoord DofMap::coord(int g) const {
  if (g < 0 || g >= total()) {
    throw GridError("DofMap::coord: index " + std::to_string(g) + " out of range");
  }
  if (g < n_u) {
    return {Var::U, g % (spec.nx - 1) + 1, g / (spec.nx - 1)};
  }
  g -= n_u;
  if (g < n_v) {
    return {Var::V, g % spec.nx, g / spec.nx};
  }
  g -= n_v;
  if (g < m) {
    return {Var::Pff, g % spec.nx, g / spec.nx};
  }
  g -= m;
  return {Var::Ppm, g % spec.nx, g / spec.nx};
}

Eigen::Vector2d StaggeredGrid::u_pos(int i, int level) const {
  double y = level == 0 ? 0.0 : (level - 0.5) * hy_ff();
  return {i * hx(), y};
}

Eigen::Vector2d StaggeredGrid::v_pos(int i, int level) const {
  return {(i + 0.5) * hx(), level * hy_ff()};
}

Eigen::Vector2d StaggeredGrid::pff_pos(int i, int j) const {
  return {(i + 0.5) * hx(), (j + 0.5) * hy_ff()};
}

Eigen::Vector2d StaggeredGrid::ppm_cell_pos(int i, int jj) const {
  return {(i + 0.5) * hx(), -0.5 + (jj + 0.5) * hy_pm()};
}

Eigen::Vector2d StaggeredGrid::ppm_iface_pos(int i) const {
  return {(i + 0.5) * hx(), 0.0};
}

StaggeredGrid build_grid(const GridSpec& spec, bool require_uniform) {
  if (spec.nx < 2) {
    throw GridError("build_grid: nx = " + std::to_string(spec.nx) +
                    " is too coarse for interior stencils (need nx >= 2)");
  }
  if (spec.ny_ff < 1 || spec.ny_pm < 1) {
    throw GridError("build_grid: ny_ff and ny_pm must be positive");
  }
  if (require_uniform) {
    const double hx = spec.hx();
    if (std::abs(spec.hy_ff() - hx) > 1e-14 || std::abs(spec.hy_pm() - hx) > 1e-14) {
      throw GridError("build_grid: uniform benchmark mode requires hx = hy "
                      "(nx = 2*ny_ff = 2*ny_pm)");
    }
  }

  StaggeredGrid grid;
  grid.spec = spec;
  grid.dof.spec = spec;
  grid.dof.n_u = (spec.nx - 1) * (spec.ny_ff + 1);
  grid.dof.n_v = spec.nx * spec.ny_ff;
  grid.dof.m = spec.nx * spec.ny_ff;
  grid.dof.l = spec.nx * (spec.ny_pm + 1);

  const DofMap& d = grid.dof;
  const int nx = spec.nx;
  grid.interface.reserve(nx);
  for (int s = 0; s < nx; ++s) {
    InterfaceDescriptor c;
    c.segment = s;
    c.x_left = s * spec.hx();
    c.x_mid = (s + 0.5) * spec.hx();

    c.v_P = d.v(s, 0);
    c.v_N = spec.ny_ff >= 2 ? d.v(s, 1) : -1;  // ny_ff==1: v above is top Dirichlet
    c.v_W = s > 0 ? d.v(s - 1, 0) : -1;
    c.v_E = s < nx - 1 ? d.v(s + 1, 0) : -1;
    c.u_w = s > 0 ? d.u(s, 0) : -1;
    c.u_e = s < nx - 1 ? d.u(s + 1, 0) : -1;
    c.u_nw = s > 0 ? d.u(s, 1) : -1;
    c.u_ne = s < nx - 1 ? d.u(s + 1, 1) : -1;
    c.p_ff_n = d.pff(s, 0);
    c.p_pm_P = d.ppm_iface(s);
    c.p_pm_s = d.ppm_cell(s, spec.ny_pm - 1);

    c.has_tangential_row = s > 0;
    if (c.has_tangential_row) {
      c.t_u_P = c.u_w;
      c.t_u_N = c.u_nw;
      c.t_v_w = d.v(s - 1, 0);
      c.t_v_e = d.v(s, 0);
      c.t_p_w = d.ppm_iface(s - 1);
      c.t_p_e = d.ppm_iface(s);
    }
    grid.interface.push_back(c);
  }
  return grid;
}

std::vector<InterfaceDescriptor> interface_columns(const StaggeredGrid& grid) {
  return grid.interface;
}

}  // namespace sd
