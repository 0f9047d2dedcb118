// Command-line front end: solve / spectrum / convergence / sweep / verify.
// Exit codes: 0 success, 1 numerical failure (no convergence, failed check),
// 2 usage or configuration error.
#include <CLI11.hpp>

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sd/analysis.hpp"
#include "sd/bench.hpp"
#include "sd/linalg.hpp"
#include "sd/mms.hpp"

namespace {

using nlohmann::json;

struct CommonOpts {
  std::string condition = "bjs";
  double h = 1.0 / 80.0;
  double mu = 1e-3;
  double k = 1e-2;
  double alpha = 1.0;
  std::string precond = "tri";
  std::string mode = "exact";
  double tol = 1e-8;
  int restart = 20;
  int maxit = 2000;
  bool no_timings = false;
  bool force = false;
  std::string out;
};

sd::PhysicalParams to_params(const CommonOpts& o) {
  sd::PhysicalParams p;
  p.mu = o.mu;
  p.kxx = o.k;
  p.kyy = o.k;
  p.alpha = o.alpha;
  p.condition = sd::parse_condition(o.condition);
  return p;
}

// The convergence subcommand takes a list of mesh sizes under the same flag
// name, so --h is not part of the shared physics set.
void add_physics_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--condition", o.condition, "Interface closure: bj|bjs")
      ->check(CLI::IsMember({"bj", "bjs"}));
  cmd->add_option("--mu", o.mu, "Viscosity")->check(CLI::PositiveNumber);
  cmd->add_option("--k", o.k, "Permeability (isotropic, sets both tensor entries)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", o.alpha, "Slip coefficient")->check(CLI::PositiveNumber);
}

void add_mesh_flag(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--h", o.h, "Mesh size (1/h must be an even integer)");
}

// --h is a real option on several subcommands, so help answers only to
// --help; the default -h short flag would collide at registration time.
CLI::App* add_subcommand(CLI::App& app, const std::string& name, const std::string& desc) {
  CLI::App* cmd = app.add_subcommand(name, desc);
  cmd->set_help_flag("--help", "Print this help message and exit");
  return cmd;
}

void add_precond_flags(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--precond", o.precond, "Preconditioner: none|diag|tri|con")
      ->check(CLI::IsMember({"none", "diag", "tri", "con"}));
  cmd->add_option("--mode", o.mode, "Preconditioner realization: exact|inexact")
      ->check(CLI::IsMember({"exact", "inexact"}));
}

// Very fine exact-mode runs factor enormous Schur complements; refuse unless
// the user insists.
void guard_exact_cost(const CommonOpts& o) {
  if (o.mode == "exact" && o.h < 1.0 / 320.0 - 1e-12 && !o.force) {
    throw sd::ConfigError("exact mode at h < 1/320 is disabled by default (pass --force)");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw sd::ConfigError("cannot open output file " + path);
  return f;
}

void write_rhs_file(const std::string& path, const sd::Vector& rhs) {
  std::ofstream out(path);
  if (!out) throw sd::ConfigError("cannot open output file " + path);
  out << "%%MatrixMarket matrix array real general\n";
  out << rhs.size() << " 1\n";
  char buf[64];
  for (Eigen::Index i = 0; i < rhs.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", rhs[i]);
    out << buf << "\n";
  }
}

// Structured text record for --report: flat key = value lines, one per field,
// same shape the sweep config uses.
void write_report_file(const std::string& path, const sd::TableRecord& r, double true_residual,
                       bool no_timings) {
  std::ofstream out = open_out(path);
  char buf[64];
  out << "condition = " << r.condition << "\n";
  out << "precond = " << r.precond << "\n";
  out << "mode = " << r.mode << "\n";
  std::snprintf(buf, sizeof buf, "%.12g", r.h);
  out << "h = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.12g", r.mu);
  out << "mu = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.12g", r.k);
  out << "k = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.12g", r.alpha);
  out << "alpha = " << buf << "\n";
  out << "iterations = " << r.iterations << "\n";
  out << "converged = " << (r.converged ? "true" : "false") << "\n";
  std::snprintf(buf, sizeof buf, "%.6e", true_residual);
  out << "true_relative_residual = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.6f", no_timings ? 0.0 : r.setup_time_s);
  out << "setup_time_s = " << buf << "\n";
  std::snprintf(buf, sizeof buf, "%.6f", no_timings ? 0.0 : r.wall_time_s);
  out << "wall_time_s = " << buf << "\n";
}

int cmd_solve(const CommonOpts& o, const std::string& export_matrix,
              const std::string& report_path) {
  guard_exact_cost(o);
  const sd::BlockSystem sys =
      sd::assemble_benchmark(sd::parse_condition(o.condition), o.h, to_params(o));
  if (!export_matrix.empty()) {
    sd::write_matrix_market(export_matrix, sys.monolithic);
    write_rhs_file(export_matrix + ".rhs", sys.rhs);
  }
  sd::PrecondOptions popts;
  popts.kind = sd::parse_precond_kind(o.precond);
  popts.mode = sd::parse_precond_mode(o.mode);
  sd::SolverConfig scfg;
  scfg.tol = o.tol;
  scfg.restart = o.restart;
  scfg.maxit = o.maxit;
  scfg.record_history = false;
  const sd::SolveOutcome outcome = sd::run_benchmark_solve(sys, o.h, popts, scfg);

  std::vector<sd::TableRecord> recs{outcome.record};
  if (o.out.empty()) {
    sd::write_csv(std::cout, recs, !o.no_timings);
  } else {
    std::ofstream f = open_out(o.out);
    sd::write_csv(f, recs, !o.no_timings);
  }
  if (!report_path.empty()) {
    const double rel = (sys.rhs - sd::spmv(sys.monolithic, outcome.report.x)).norm() /
                       std::max(sys.rhs.norm(), 1e-300);
    write_report_file(report_path, outcome.record, rel, o.no_timings);
  }
  if (!outcome.record.converged) {
    std::cerr << "solve: no convergence within " << o.maxit << " iterations (last residual "
              << (outcome.report.residual_history.empty()
                      ? 1.0
                      : outcome.report.residual_history.back())
              << ")\n";
    return 1;
  }
  return 0;
}

int cmd_spectrum(const CommonOpts& o) {
  guard_exact_cost(o);
  const sd::BlockSystem sys =
      sd::assemble_benchmark(sd::parse_condition(o.condition), o.h, to_params(o));
  const sd::ApplyFn pinv = sd::analysis_pinv(sys, sd::parse_precond_kind(o.precond),
                                             sd::parse_precond_mode(o.mode));
  const sd::Spectrum spec = sd::preconditioned_spectrum(sys, pinv);
  if (o.out.empty()) {
    sd::write_spectrum_csv(std::cout, spec);
  } else {
    std::ofstream f = open_out(o.out);
    sd::write_spectrum_csv(f, spec);
  }
  return 0;
}

int cmd_convergence(const CommonOpts& o, std::vector<double> hs) {
  if (hs.empty()) hs = {0.1, 0.05, 0.025};
  const sd::ConvergenceTable table =
      sd::convergence_study(sd::parse_condition(o.condition), to_params(o), hs);
  std::ostringstream csv;
  csv << "condition,h,err_velocity,err_pff,err_ppm,order_velocity,order_pff,order_ppm\n";
  char buf[256];
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const sd::ConvergenceRow& row = table.rows[i];
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%.12g", o.condition.c_str(), row.h,
                  row.errors.velocity, row.errors.p_ff, row.errors.p_pm);
    csv << buf;
    if (i == 0) {
      csv << ",,,\n";
    } else {
      const sd::FieldErrors& ord = table.orders[i - 1];
      std::snprintf(buf, sizeof buf, ",%.4f,%.4f,%.4f", ord.velocity, ord.p_ff, ord.p_pm);
      csv << buf << "\n";
    }
  }
  if (o.out.empty()) {
    std::cout << csv.str();
  } else {
    open_out(o.out) << csv.str();
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, std::string out_override, bool no_timings) {
  sd::SweepSpec spec = sd::load_sweep_config(config_path);
  if (!out_override.empty()) spec.output = out_override;
  const std::vector<sd::TableRecord> records = sd::run_sweep(spec);
  if (spec.output.empty()) {
    sd::write_csv(std::cout, records, !no_timings);
  } else {
    std::ofstream f = open_out(spec.output);
    sd::write_csv(f, records, !no_timings);
  }
  for (const sd::TableRecord& rec : records) {
    if (!rec.converged) {
      std::cerr << "sweep: at least one combination did not converge\n";
      return 1;
    }
  }
  return 0;
}

// Small self-check battery over analysis-size grids. One JSON line per check.
int cmd_verify() {
  int failed = 0;
  int passed = 0;
  const auto emit = [&](json j, bool ok) {
    j["pass"] = ok;
    std::cout << j.dump() << "\n";
    (ok ? passed : failed) += 1;
  };

  // Structural assembly checks (rank, definiteness, symmetry).
  for (const char* cname : {"bj", "bjs"}) {
    const sd::Condition cond = sd::parse_condition(cname);
    bool ok = true;
    std::string err;
    try {
      sd::PhysicalParams p;
      p.condition = cond;
      const sd::ManufacturedSolution mms(p);
      const sd::StaggeredGrid grid = sd::build_grid(sd::spec_from_h(0.125));
      sd::assemble_coupled(grid, p, mms.sources(), 1);
    } catch (const std::exception& e) {
      ok = false;
      err = e.what();
    }
    json j{{"check", "assembly-structure"}, {"condition", cname}, {"h", 0.125}};
    if (!ok) j["error"] = err;
    emit(j, ok);
  }

  // The continuity block behaves as an exact A-orthogonal projector: the
  // scaled coupling norm is 1 on every grid.
  for (double h : {0.25, 0.125, 0.0625}) {
    const sd::BlockSystem sys = sd::assemble_benchmark(sd::Condition::BJS, h, {});
    const sd::WeightH H = sd::make_weight(sys);
    const double norm = sd::projection_norm_surrogate(sys, H);
    const bool ok = std::abs(norm - 1.0) <= 1e-6;
    emit(json{{"check", "coupling-norm"}, {"h", h}, {"value", norm}}, ok);
  }

  for (double h : {0.25, 0.125}) {
    const sd::BlockSystem sys = sd::assemble_benchmark(sd::Condition::BJS, h, {});
    const sd::WeightH H = sd::make_weight(sys);
    const sd::MbarCheck mc = sd::mbar_check(sys, H);
    const bool ok =
        mc.max_set_distance <= 1e-6 && mc.projector_defect <= 1e-8 && mc.golden_attained;
    emit(json{{"check", "congruence-spectrum"},
              {"h", h},
              {"max_set_distance", mc.max_set_distance},
              {"projector_defect", mc.projector_defect},
              {"golden_attained", mc.golden_attained}},
         ok);
  }

  {
    const double h = 0.125;
    const sd::BlockSystem sys = sd::assemble_benchmark(sd::Condition::BJS, h, {});
    const sd::WeightH H = sd::make_weight(sys);
    const sd::DenseMatrix Hinv = sd::dense_weight_inverse(H);
    const sd::DenseMatrix Hd = sd::dense_weight(H);
    const sd::EquivalenceConstants diag = sd::norm_equivalence(sd::dense_pdiag(sys, H), Hd, Hinv);
    const sd::EquivalenceConstants tri = sd::norm_equivalence(sd::dense_ptri(sys, H), Hd, Hinv);
    const double phi = std::sqrt((3.0 + std::sqrt(5.0)) / 2.0);
    const double inv_phi = std::sqrt((3.0 - std::sqrt(5.0)) / 2.0);
    const bool ok_diag = std::abs(diag.gamma - 1.0) <= 1e-6 && std::abs(diag.Gamma - 1.0) <= 1e-6;
    const bool ok_tri =
        std::abs(tri.gamma - inv_phi) <= 1e-6 && std::abs(tri.Gamma - phi) <= 1e-6;
    emit(json{{"check", "norm-equivalence-diag"},
              {"h", h},
              {"gamma", diag.gamma},
              {"Gamma", diag.Gamma}},
         ok_diag);
    emit(json{{"check", "norm-equivalence-tri"},
              {"h", h},
              {"gamma", tri.gamma},
              {"Gamma", tri.Gamma}},
         ok_tri);
  }

  {
    const double h = 0.125;
    const sd::BlockSystem sys = sd::assemble_benchmark(sd::Condition::BJS, h, {});
    const sd::QuadraticCheck qc = sd::constraint_quadratic_check(sys);
    const bool ok = qc.max_residual <= 1e-6 && qc.lambda_one + qc.quadratic == qc.total;
    emit(json{{"check", "constraint-spectrum-identity"},
              {"h", h},
              {"eigenvalues", qc.total},
              {"lambda_one_branch", qc.lambda_one},
              {"quadratic_branch", qc.quadratic},
              {"max_residual", qc.max_residual}},
         ok);
  }

  {
    // On the decoupled operator the triangular field-of-values constants are
    // exact (1/2 and sqrt((3+sqrt5)/2)); on the coupled one they shift but
    // stay mesh-independent, which is what the drift check pins down.
    const sd::BlockSystem dec = sd::drop_interface_coupling(
        sd::assemble_benchmark(sd::Condition::BJS, 0.125, {}));
    const sd::WeightH Hd = sd::make_weight(dec);
    const sd::ApplyFn pd = sd::analysis_pinv(dec, sd::PrecondKind::Tri, sd::PrecondMode::Exact, &Hd);
    const sd::EquivalenceConstants fd = sd::fov_constants(dec, pd, Hd);
    const double golden = std::sqrt((3.0 + std::sqrt(5.0)) / 2.0);
    emit(json{{"check", "field-of-values-decoupled"}, {"h", 0.125}, {"gamma", fd.gamma},
              {"Gamma", fd.Gamma}},
         std::abs(fd.gamma - 0.5) <= 1e-6 && std::abs(fd.Gamma - golden) <= 1e-6);

    double gamma8 = 0, Gamma8 = 0;
    for (double h : {0.125, 0.0625}) {
      const sd::BlockSystem sys = sd::assemble_benchmark(sd::Condition::BJS, h, {});
      const sd::WeightH H = sd::make_weight(sys);
      const sd::ApplyFn pinv =
          sd::analysis_pinv(sys, sd::PrecondKind::Tri, sd::PrecondMode::Exact, &H);
      const sd::EquivalenceConstants fov = sd::fov_constants(sys, pinv, H);
      emit(json{{"check", "field-of-values"}, {"h", h}, {"gamma", fov.gamma},
                {"Gamma", fov.Gamma}},
           fov.Gamma > std::abs(fov.gamma) && std::abs(fov.gamma) > 0);
      if (h == 0.125) {
        gamma8 = fov.gamma;
        Gamma8 = fov.Gamma;
      }

      if (h == 0.0625) {
        const sd::ResidualBoundReport rb =
            sd::residual_bound_check(sys, pinv, H, fov.gamma, fov.Gamma);
        emit(json{{"check", "residual-bound"},
                  {"h", h},
                  {"steps", rb.ratios.size()},
                  {"final_ratio", rb.ratios.empty() ? 1.0 : rb.ratios.back()},
                  {"final_bound", rb.bounds.empty() ? 1.0 : rb.bounds.back()}},
             rb.all_pass);
        const sd::ResidualBoundReport rbd = sd::residual_bound_check(dec, pd, Hd, fd.gamma, fd.Gamma);
        emit(json{{"check", "residual-bound-decoupled"},
                  {"h", 0.125},
                  {"steps", rbd.ratios.size()},
                  {"final_ratio", rbd.ratios.empty() ? 1.0 : rbd.ratios.back()},
                  {"final_bound", rbd.bounds.empty() ? 1.0 : rbd.bounds.back()}},
             rbd.all_pass);
        const double gdrift =
            std::abs(fov.gamma - gamma8) / std::max(std::abs(gamma8), 1e-300);
        const double Gdrift =
            std::abs(fov.Gamma - Gamma8) / std::max(std::abs(Gamma8), 1e-300);
        emit(json{{"check", "field-of-values-drift"}, {"gamma_drift", gdrift},
                  {"Gamma_drift", Gdrift}},
             gdrift <= 0.10 && Gdrift <= 0.10);
      }
    }
  }

  {
    const sd::BlockSystem sys = sd::assemble_benchmark(sd::Condition::BJS, 0.125, {});
    const double rho1 = sd::rho1_estimate(sys);
    emit(json{{"check", "velocity-approximation-rho1"}, {"h", 0.125}, {"value", rho1},
              {"informational", true}},
         true);
  }

  std::cout << json{{"check", "summary"}, {"passed", passed}, {"failed", failed}}.dump() << "\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered-grid solver for coupled free/porous incompressible flow"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");

  CommonOpts o;
  std::string export_matrix;
  std::string report_path;
  std::vector<double> conv_hs;
  std::string sweep_config;

  CLI::App* solve = add_subcommand(app, "solve", "Assemble and solve one benchmark problem");
  add_physics_flags(solve, o);
  add_mesh_flag(solve, o);
  add_precond_flags(solve, o);
  solve->add_option("--tol", o.tol, "Relative residual tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--restart", o.restart, "GMRES restart length")->check(CLI::PositiveNumber);
  solve->add_option("--maxit", o.maxit, "Iteration cap")->check(CLI::PositiveNumber);
  solve->add_option("--export-matrix", export_matrix,
                    "Write the assembled matrix (coordinate format) and rhs to PATH / PATH.rhs");
  solve->add_option("--report", report_path, "Write a key = value solve report to PATH");
  solve->add_option("--out", o.out, "Write the result CSV here instead of stdout");
  solve->add_flag("--no-timings", o.no_timings, "Zero the time columns (byte-stable output)");
  solve->add_flag("--force", o.force, "Allow very fine exact-mode runs");

  CLI::App* spectrum =
      add_subcommand(app, "spectrum", "Eigenvalues of the preconditioned matrix (CSV re,im)");
  add_physics_flags(spectrum, o);
  add_mesh_flag(spectrum, o);
  add_precond_flags(spectrum, o);
  spectrum->add_option("--out", o.out, "Write the spectrum CSV here instead of stdout");
  spectrum->add_flag("--force", o.force, "Allow very fine exact-mode runs");

  CLI::App* convergence =
      add_subcommand(app, "convergence", "Discretization-error study on refined grids");
  add_physics_flags(convergence, o);
  convergence->add_option("--h", conv_hs, "Mesh sizes (repeatable; default 0.1 0.05 0.025)")
      ->take_all();
  convergence->add_option("--out", o.out, "Write the error CSV here instead of stdout");

  CLI::App* sweep = add_subcommand(app, "sweep", "Run a parameter sweep from a key=value config");
  sweep->add_option("--config", sweep_config, "Path to the sweep configuration")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", o.out, "Override the config's output path");
  sweep->add_flag("--no-timings", o.no_timings, "Zero the time columns (byte-stable output)");

  CLI::App* verify = add_subcommand(app, "verify", "Run the built-in analysis checks (JSON lines)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return cmd_solve(o, export_matrix, report_path);
    if (spectrum->parsed()) return cmd_spectrum(o);
    if (convergence->parsed()) return cmd_convergence(o, conv_hs);
    if (sweep->parsed()) return cmd_sweep(sweep_config, o.out, o.no_timings);
    if (verify->parsed()) return cmd_verify();
    return 2;  // unreachable: a subcommand is required
  } catch (const sd::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const sd::GridError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
