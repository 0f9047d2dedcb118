#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <tuple>

#include "sd/grid.hpp"

using namespace sd;

namespace {

// Independent enumeration in the documented order (u, v, p_ff, p_pm; x fastest,
// y ascending; interface unknowns are the lowest level of their variable).
std::map<std::tuple<Var, int, int>, int> brute_force_numbering(const GridSpec& sp) {
  std::map<std::tuple<Var, int, int>, int> id;
  int next = 0;
  for (int level = 0; level <= sp.ny_ff; ++level) {
    for (int i = 1; i <= sp.nx - 1; ++i) id[{Var::U, i, level}] = next++;
  }
  for (int level = 0; level <= sp.ny_ff - 1; ++level) {
    for (int i = 0; i < sp.nx; ++i) id[{Var::V, i, level}] = next++;
  }
  for (int j = 0; j < sp.ny_ff; ++j) {
    for (int i = 0; i < sp.nx; ++i) id[{Var::Pff, i, j}] = next++;
  }
  for (int jj = 0; jj < sp.ny_pm; ++jj) {
    for (int i = 0; i < sp.nx; ++i) id[{Var::Ppm, i, jj}] = next++;
  }
  for (int i = 0; i < sp.nx; ++i) id[{Var::Ppm, i, sp.ny_pm}] = next++;
  return id;
}

}  // namespace

TEST_CASE("benchmark grid has the expected unknown counts") {
  const StaggeredGrid g = build_grid(square_grid(8));
  CHECK(g.dof.n_u == 35);
  CHECK(g.dof.n_v == 32);
  CHECK(g.dof.n() == 67);
  CHECK(g.dof.m == 32);
  CHECK(g.dof.l == 40);
  CHECK(g.dof.total() == 139);

  const StaggeredGrid tiny = build_grid(square_grid(2));
  CHECK(tiny.dof.n_u == 2);
  CHECK(tiny.dof.n_v == 2);
  CHECK(tiny.dof.m == 2);
  CHECK(tiny.dof.l == 4);
}

TEST_CASE("dof numbering matches a brute-force enumeration") {
  for (int nx : {2, 4, 8, 12}) {
    const GridSpec sp = square_grid(nx);
    const StaggeredGrid g = build_grid(sp);
    const auto id = brute_force_numbering(sp);
    CHECK(static_cast<int>(id.size()) == g.dof.total());
    for (const auto& [key, expected] : id) {
      const auto [var, i, level] = key;
      int got = -1;
      switch (var) {
        case Var::U: got = g.dof.u(i, level); break;
        case Var::V: got = g.dof.v(i, level); break;
        case Var::Pff: got = g.dof.pff(i, level); break;
        case Var::Ppm:
          got = level == sp.ny_pm ? g.dof.ppm_iface(i) : g.dof.ppm_cell(i, level);
          break;
      }
      CHECK(got == expected);
    }
  }
}

TEST_CASE("coord round-trips every index") {
  const StaggeredGrid g = build_grid(square_grid(8));
  const GridSpec sp = g.spec;
  for (int idx = 0; idx < g.dof.total(); ++idx) {
    const DofCoord c = g.dof.coord(idx);
    int back = -1;
    switch (c.kind) {
      case Var::U: back = g.dof.u(c.i, c.level); break;
      case Var::V: back = g.dof.v(c.i, c.level); break;
      case Var::Pff: back = g.dof.pff(c.i, c.level); break;
      case Var::Ppm:
        back = c.level == sp.ny_pm ? g.dof.ppm_iface(c.i) : g.dof.ppm_cell(c.i, c.level);
        break;
    }
    CHECK(back == idx);
  }
  CHECK_THROWS_AS(g.dof.coord(-1), GridError);
  CHECK_THROWS_AS(g.dof.coord(g.dof.total()), GridError);
}

TEST_CASE("unknown positions sit on the staggered lattice") {
  const StaggeredGrid g = build_grid(square_grid(8));
  const double h = 0.125;
  CHECK(g.u_pos(3, 0).x() == doctest::Approx(3 * h));
  CHECK(g.u_pos(3, 0).y() == doctest::Approx(0.0));
  CHECK(g.u_pos(3, 2).y() == doctest::Approx(1.5 * h));
  CHECK(g.v_pos(2, 0).x() == doctest::Approx(2.5 * h));
  CHECK(g.v_pos(2, 3).y() == doctest::Approx(3 * h));
  CHECK(g.pff_pos(0, 0).x() == doctest::Approx(0.5 * h));
  CHECK(g.pff_pos(0, 0).y() == doctest::Approx(0.5 * h));
  CHECK(g.ppm_cell_pos(1, 0).y() == doctest::Approx(-0.5 + 0.5 * h));
  CHECK(g.ppm_cell_pos(1, 3).y() == doctest::Approx(-0.5 * h));
  CHECK(g.ppm_iface_pos(5).y() == doctest::Approx(0.0));
  CHECK(g.ppm_iface_pos(5).x() == doctest::Approx(5.5 * h));
}

TEST_CASE("interface descriptors expose neighbors and corner flags") {
  const StaggeredGrid g = build_grid(square_grid(8));
  const DofMap& d = g.dof;
  REQUIRE(g.interface.size() == 8);

  const InterfaceDescriptor& mid = g.interface[3];
  CHECK(mid.x_left == doctest::Approx(0.375));
  CHECK(mid.x_mid == doctest::Approx(0.4375));
  CHECK(mid.v_P == d.v(3, 0));
  CHECK(mid.v_N == d.v(3, 1));
  CHECK(mid.v_W == d.v(2, 0));
  CHECK(mid.v_E == d.v(4, 0));
  CHECK(mid.u_w == d.u(3, 0));
  CHECK(mid.u_e == d.u(4, 0));
  CHECK(mid.u_nw == d.u(3, 1));
  CHECK(mid.u_ne == d.u(4, 1));
  CHECK(mid.p_ff_n == d.pff(3, 0));
  CHECK(mid.p_pm_P == d.ppm_iface(3));
  CHECK(mid.p_pm_s == d.ppm_cell(3, 3));
  CHECK(mid.has_tangential_row);
  CHECK(mid.t_u_P == d.u(3, 0));
  CHECK(mid.t_u_N == d.u(3, 1));
  CHECK(mid.t_v_w == d.v(2, 0));
  CHECK(mid.t_v_e == d.v(3, 0));
  CHECK(mid.t_p_w == d.ppm_iface(2));
  CHECK(mid.t_p_e == d.ppm_iface(3));

  const InterfaceDescriptor& west = g.interface[0];
  CHECK(west.v_W == -1);
  CHECK(west.u_w == -1);
  CHECK(west.u_nw == -1);
  CHECK_FALSE(west.has_tangential_row);

  const InterfaceDescriptor& east = g.interface[7];
  CHECK(east.v_E == -1);
  CHECK(east.u_e == -1);
  CHECK(east.u_ne == -1);
  CHECK(east.has_tangential_row);

  CHECK(interface_columns(g).size() == 8);
}

TEST_CASE("refinement doubles every direction") {
  const GridSpec sp = square_grid(8);
  const GridSpec fine = sp.refined();
  CHECK(fine.nx == 16);
  CHECK(fine.ny_ff == 8);
  CHECK(fine.ny_pm == 8);
  const StaggeredGrid g = build_grid(fine);
  CHECK(g.dof.n_u == 15 * 9);
  CHECK(g.dof.m == 16 * 8);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(build_grid(GridSpec{1, 1, 1}), GridError);
  CHECK_THROWS_AS(build_grid(GridSpec{4, 0, 2}), GridError);
  CHECK_THROWS_AS(build_grid(GridSpec{4, 2, -1}), GridError);
  // Nonuniform cells are rejected in benchmark mode, accepted otherwise.
  CHECK_THROWS_AS(build_grid(GridSpec{8, 4, 2}), GridError);
  CHECK_NOTHROW(build_grid(GridSpec{8, 4, 2}, false));
  CHECK_THROWS_AS(square_grid(3), GridError);
  CHECK_THROWS_AS(square_grid(0), GridError);
}
