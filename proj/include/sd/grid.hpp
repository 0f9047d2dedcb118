#pragma once

#include <vector>

#include "sd/types.hpp"

namespace sd {

// Geometry: free flow occupies [0,1] x [0,1/2], the porous medium [0,1] x [-1/2,0],
// coupled across the flat interface y = 0. Cells are nx columns wide in both
// subdomains; ny_ff / ny_pm rows tall.
struct GridSpec {
  int nx = 8;
  int ny_ff = 4;
  int ny_pm = 4;

  double hx() const { return 1.0 / nx; }
  double hy_ff() const { return 0.5 / ny_ff; }
  double hy_pm() const { return 0.5 / ny_pm; }

  GridSpec refined() const { return GridSpec{2 * nx, 2 * ny_ff, 2 * ny_pm}; }
};

// Convenience for the uniform square-cell benchmark: h = 1/nx = 1/2/ny.
GridSpec square_grid(int nx);

enum class Var { U, V, Pff, Ppm };

struct DofCoord {
  Var kind;
  int i;
  int level;
};

// Staggered (MAC) unknown numbering. Order: all u, then all v, then p_ff, then
// p_pm, each lexicographic with x fastest and y ascending.
//
//   u: vertical ff faces. level 0 = tangential unknowns on the interface (y=0);
//      level 1..ny_ff = face centers at y=(level-1/2)hy. i in [1,nx-1]; the wall
//      columns i=0,nx carry Dirichlet data and are eliminated.
//   v: horizontal ff faces. level 0 = interface unknowns (y=0); level
//      1..ny_ff-1 at y=level*hy. i in [0,nx-1]; the top row y=1/2 is Dirichlet.
//   p_ff: cell centers, j in [0,ny_ff-1] bottom-up.
//   p_pm: cell centers jj in [0,ny_pm-1] bottom-up (jj=ny_pm-1 touches the
//      interface), then the nx interface pressure nodes at y=0. External
//      boundary nodes are Dirichlet and eliminated.
struct DofMap {
  GridSpec spec;
  int n_u = 0;
  int n_v = 0;
  int m = 0;
  int l = 0;

  int n() const { return n_u + n_v; }
  int total() const { return n() + m + l; }

  int u(int i, int level) const { return level * (spec.nx - 1) + (i - 1); }
  int v(int i, int level) const { return n_u + level * spec.nx + i; }
  int pff(int i, int j) const { return n() + j * spec.nx + i; }
  int ppm_cell(int i, int jj) const { return n() + m + jj * spec.nx + i; }
  int ppm_iface(int i) const { return n() + m + spec.ny_pm * spec.nx + i; }

  DofCoord coord(int g) const;
};

// Index bundle for one interface segment ((s)hx,(s+1)hx) x {0}. Entries are
// global indices; -1 marks a neighbor that is Dirichlet data (domain corner or
// wall) rather than an unknown. Fields v_* / u_* / p_* belong to the
// normal-force row and mass row centered at x_mid; t_* belong to the
// tangential condition row for the interface u-unknown at the left edge
// x_left, which exists only for segments 1..nx-1.
struct InterfaceDescriptor {
  int segment = 0;
  double x_left = 0;
  double x_mid = 0;

  int v_P = -1;
  int v_N = -1;
  int v_W = -1;
  int v_E = -1;
  int u_w = -1;
  int u_e = -1;
  int u_nw = -1;
  int u_ne = -1;
  int p_ff_n = -1;
  int p_pm_P = -1;
  int p_pm_s = -1;

  bool has_tangential_row = false;
  int t_u_P = -1;
  int t_u_N = -1;
  int t_v_w = -1;
  int t_v_e = -1;
  int t_p_w = -1;
  int t_p_e = -1;
};

struct StaggeredGrid {
  GridSpec spec;
  DofMap dof;
  std::vector<InterfaceDescriptor> interface;

  double hx() const { return spec.hx(); }
  double hy_ff() const { return spec.hy_ff(); }
  double hy_pm() const { return spec.hy_pm(); }

  // Unknown positions (also defined for eliminated boundary slots).
  Eigen::Vector2d u_pos(int i, int level) const;
  Eigen::Vector2d v_pos(int i, int level) const;
  Eigen::Vector2d pff_pos(int i, int j) const;
  Eigen::Vector2d ppm_cell_pos(int i, int jj) const;
  Eigen::Vector2d ppm_iface_pos(int i) const;
};

// Builds DOF tables and interface descriptors. Throws GridError for nx < 2,
// nonpositive extents, or (when require_uniform) cell aspect ratio != 1.
StaggeredGrid build_grid(const GridSpec& spec, bool require_uniform = true);

// Interface descriptors alone (same data as build_grid(...).interface).
std::vector<InterfaceDescriptor> interface_columns(const StaggeredGrid& grid);

}  // namespace sd
