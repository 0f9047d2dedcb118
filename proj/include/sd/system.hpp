#pragma once

#include <vector>

#include "sd/grid.hpp"
#include "sd/params.hpp"
#include "sd/types.hpp"

namespace sd {

// Triplet staging area shared by the assembly passes. Block row/col indices
// are local: A is n x n over velocities, B is m x n, C1/C2 are l x n, D is
// l x l. b1/b2/b3 are the velocity / continuity / porous-pressure right-hand
// sides (b3 in the sign convention of the monolithic row [C 0 -D]).
struct AssemblyBuffers {
  std::vector<Triplet> A;
  std::vector<Triplet> B;
  std::vector<Triplet> C1;
  std::vector<Triplet> C2;
  std::vector<Triplet> D;
  Vector b1;
  Vector b2;
  Vector b3;
};

AssemblyBuffers make_buffers(const StaggeredGrid& grid);

// Interior momentum rows (deformation form, four-corner cross terms), wall and
// top Dirichlet handling (normal components eliminated, tangential components
// by linear ghost reflection), and the cell continuity rows.
void assemble_stokes(const StaggeredGrid& grid, const PhysicalParams& p,
                     const SourceFields& s, AssemblyBuffers& buf);

// Porous-medium cell balances (5-point, two-point flux). Exterior boundary
// pressures are eliminated into b3; the top-row cells couple to the interface
// pressure unknowns at half spacing.
void assemble_darcy(const StaggeredGrid& grid, const PhysicalParams& p,
                    const SourceFields& s, AssemblyBuffers& buf);

// Interface mass conservation rows: -hx on v_P into C1, the pair
// -+2 kyy hx/(mu hy) on (p_pm,s, p_pm,P) into D.
void assemble_interface_mass(const StaggeredGrid& grid, const PhysicalParams& p,
                             const SourceFields& s, AssemblyBuffers& buf);

// Half-cell normal-force balance rows for the interface v-unknowns: the eight
// velocity coefficients into A, -hx on p_pm,P into C2 (the +hx on p_ff,n is
// the B-transpose entry and is not assembled here).
void assemble_interface_normal_force(const StaggeredGrid& grid, const PhysicalParams& p,
                                     const SourceFields& s, AssemblyBuffers& buf);

// Tangential interface condition rows for the interface u-unknowns. BJS keeps
// the four velocity coefficients in A; BJ adds -+alpha kyy/sqrt(kxx) on the
// west/east interface pressures into C2.
void assemble_interface_tangential(const StaggeredGrid& grid, const PhysicalParams& p,
                                   const SourceFields& s, AssemblyBuffers& buf);

struct BlockSystem {
  StaggeredGrid grid;
  PhysicalParams params;
  int n = 0;
  int m = 0;
  int l = 0;

  SparseMatrix A;    // n x n velocity block (SPD)
  SparseMatrix A11;  // u-u principal block
  SparseMatrix A22;  // v-v principal block
  SparseMatrix A12;  // u-v coupling
  SparseMatrix B;    // m x n continuity
  SparseMatrix C1;   // l x n mass-conservation coupling, block (3,1)
  SparseMatrix C2;   // l x n momentum-side coupling, block (1,3) transposed
  SparseMatrix D;    // l x l porous-pressure block (SPD)
  Vector b1, b2, b3;

  SparseMatrix monolithic;  // [[A, B^T, C2^T], [B, 0, 0], [C1, 0, -D]]
  Vector rhs;               // [b1; b2; b3]
};

// Rebuilds the monolithic matrix and rhs from the stored blocks (used after
// block-level surgery in tests and analysis).
void rebuild_monolithic(BlockSystem& sys);

// Copy of the system with both interface-coupling blocks removed: the
// decoupled operator [[A, B^T, 0], [B, 0, 0], [0, 0, -D]] the preconditioners
// are derived from. Analysis reference point (the theory's constants are
// exact for it); not a meaningful physical problem.
BlockSystem drop_interface_coupling(BlockSystem sys);

// Full assembly. verify < 0 runs structural checks (B full row rank, A and D
// SPD, BJS symmetry) automatically on small systems; 0/1 force them off/on.
BlockSystem assemble_coupled(const StaggeredGrid& grid, const PhysicalParams& p,
                             const SourceFields& s, int verify = -1);

// Two-point Darcy face velocities reconstructed from a porous-pressure
// solution slice (length l). ux(i, jj) sits on vertical face i of cell row jj
// (bottom-up); uy(i, lev) on horizontal face level lev (0 = bottom boundary,
// ny_pm = interface).
struct DarcyVelocity {
  DenseMatrix ux;  // (nx+1) x ny_pm
  DenseMatrix uy;  // nx x (ny_pm+1)
};

DarcyVelocity postprocess_darcy_velocity(const StaggeredGrid& grid, const PhysicalParams& p,
                                         const SourceFields& s, const Vector& p_pm);

}  // namespace sd
