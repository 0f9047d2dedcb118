#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sd/krylov.hpp"
#include "sd/mms.hpp"
#include "sd/precond.hpp"
#include "sd/system.hpp"

namespace sd {

std::string to_string(Condition c);
Condition parse_condition(const std::string& s);

// Square-cell benchmark grid for mesh size h: nx = 1/h columns, nx/2 rows per
// subdomain. ConfigError unless 1/h is an even integer.
GridSpec spec_from_h(double h);

// Assembles the coupled benchmark problem driven by the manufactured solution.
BlockSystem assemble_benchmark(Condition condition, double h, const PhysicalParams& base);

// One row of the iteration-count tables; the fixed CSV schema is
//   condition,precond,mode,h,mu,k,alpha,iterations,converged,wall_time_s,setup_time_s
struct TableRecord {
  std::string condition;
  std::string precond;
  std::string mode;
  double h = 0;
  double mu = 0;
  double k = 0;
  double alpha = 0;
  int iterations = 0;
  bool converged = false;
  double wall_time_s = 0;
  double setup_time_s = 0;
};

std::string csv_header();
// with_timings=false zeroes the two time columns so repeated runs are
// byte-identical.
std::string to_csv_row(const TableRecord& rec, bool with_timings);
void write_csv(std::ostream& out, const std::vector<TableRecord>& records, bool with_timings);
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

struct SolveSetup {
  Condition condition = Condition::BJS;
  double h = 1.0 / 80.0;
  PhysicalParams params;  // condition field is overwritten from `condition`
  PrecondOptions precond;
  SolverConfig solver;
};

struct SolveOutcome {
  TableRecord record;
  SolveReport report;
};

// Assemble + precondition + solve; fills the record (including timings).
SolveOutcome run_benchmark_solve(const SolveSetup& setup);
// Same, on an already assembled system (h only labels the record).
SolveOutcome run_benchmark_solve(const BlockSystem& sys, double h, const PrecondOptions& popts,
                                 const SolverConfig& scfg);

// Discretization errors under refinement, solved directly (sparse LU) so the
// orders measure the scheme, not the iteration.
struct ConvergenceRow {
  double h = 0;
  FieldErrors errors;
};

struct ConvergenceTable {
  Condition condition = Condition::BJS;
  std::vector<ConvergenceRow> rows;
  std::vector<FieldErrors> orders;  // log2(e_i / e_{i+1}), size rows-1
};

ConvergenceTable convergence_study(Condition condition, const PhysicalParams& base,
                                   const std::vector<double>& hs);

// All kind x mode x condition combinations at one mesh size.
std::vector<TableRecord> efficiency_table(double h, const PhysicalParams& base,
                                          const SolverConfig& scfg = {});

// Inexact iteration counts across a mesh sequence.
std::vector<TableRecord> h_robustness_table(const std::vector<double>& hs,
                                            const PhysicalParams& base,
                                            const SolverConfig& scfg = {});

// Parameter sweep, configured from flat key=value files:
//   condition = bj,bjs        precond = diag,tri,con   mode = inexact
//   h = 0.0125                mu = 1e-5,1e-3,1e-1      k = 1e-3,1e-2,1e-1
//   alpha = 0.1,1,10          tol = 1e-8  restart = 20  maxit = 2000
//   budget = 2000             output = sweep.csv
// '#' starts a comment; unknown keys are ConfigErrors (with line numbers).
struct SweepSpec {
  std::vector<Condition> conditions{Condition::BJ, Condition::BJS};
  std::vector<PrecondKind> kinds{PrecondKind::Diag, PrecondKind::Tri, PrecondKind::Con};
  PrecondMode mode = PrecondMode::Inexact;
  std::vector<double> hs{1.0 / 80.0};
  std::vector<double> mus{1e-3};
  std::vector<double> ks{1e-2};
  std::vector<double> alphas{1.0};
  double tol = 1e-8;
  int restart = 20;
  int maxit = 2000;
  std::size_t budget = 2000;
  std::string output;  // empty = stdout

  std::size_t combinations() const;
};

SweepSpec parse_sweep_config(std::istream& in);
SweepSpec load_sweep_config(const std::string& path);

// Runs every combination (ConfigError if the count exceeds the budget).
// Setup or inner-solve failures in a cell are recorded as converged = 0
// rather than aborting the sweep.
std::vector<TableRecord> run_sweep(const SweepSpec& spec);

}  // namespace sd
