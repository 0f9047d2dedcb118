#include "sd/bench.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sd {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) items.push_back(cur);
  }
  return items;
}

double parse_double(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

int parse_int(const std::string& s, int line) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config line " + std::to_string(line) + ": not an integer: '" + s + "'");
  }
}

}  // namespace

std::string to_string(Condition c) { return c == Condition::BJ ? "bj" : "bjs"; }

Condition parse_condition(const std::string& s) {
  if (s == "bj") return Condition::BJ;
  if (s == "bjs") return Condition::BJS;
  throw ConfigError("unknown condition '" + s + "' (expected bj|bjs)");
}

GridSpec spec_from_h(double h) {
  if (!(h > 0) || !(h <= 0.5)) {
    throw ConfigError("mesh size h must lie in (0, 1/2], got " + fmt("%g", h));
  }
  const double inv = 1.0 / h;
  const int nx = static_cast<int>(std::lround(inv));
  if (std::abs(inv - nx) > 1e-9 * inv || nx % 2 != 0) {
    throw ConfigError("mesh size h must satisfy 1/h = even integer, got h = " + fmt("%g", h));
  }
  return square_grid(nx);
}

BlockSystem assemble_benchmark(Condition condition, double h, const PhysicalParams& base) {
  PhysicalParams p = base;
  p.condition = condition;
  const ManufacturedSolution mms(p);
  const StaggeredGrid grid = build_grid(spec_from_h(h));
  return assemble_coupled(grid, p, mms.sources());
}

std::string csv_header() {
  return "condition,precond,mode,h,mu,k,alpha,iterations,converged,wall_time_s,setup_time_s";
}

std::string to_csv_row(const TableRecord& rec, bool with_timings) {
  std::string row = rec.condition + "," + rec.precond + "," + rec.mode + "," +
                    fmt("%.12g", rec.h) + "," + fmt("%.12g", rec.mu) + "," +
                    fmt("%.12g", rec.k) + "," + fmt("%.12g", rec.alpha) + "," +
                    std::to_string(rec.iterations) + "," + (rec.converged ? "1" : "0") + "," +
                    fmt("%.6f", with_timings ? rec.wall_time_s : 0.0) + "," +
                    fmt("%.6f", with_timings ? rec.setup_time_s : 0.0);
  return row;
}

void write_csv(std::ostream& out, const std::vector<TableRecord>& records, bool with_timings) {
  out << csv_header() << "\n";
  for (const TableRecord& rec : records) out << to_csv_row(rec, with_timings) << "\n";
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "re,im\n";
  char buf[80];
  for (Eigen::Index i = 0; i < spectrum.values.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", spectrum.values[i].real(),
                  spectrum.values[i].imag());
    out << buf << "\n";
  }
}

SolveOutcome run_benchmark_solve(const BlockSystem& sys, double h, const PrecondOptions& popts,
                                 const SolverConfig& scfg) {
  const std::unique_ptr<Preconditioner> P = make_preconditioner(sys, popts);
  const ApplyFn op = [&sys](const Vector& x) { return spmv(sys.monolithic, x); };
  const ApplyFn pinv = popts.kind == PrecondKind::None ? ApplyFn{} : P->as_operator();
  const SolveReport report = fgmres(op, pinv, sys.rhs, scfg);

  SolveOutcome out;
  out.record.condition = to_string(sys.params.condition);
  out.record.precond = to_string(popts.kind);
  out.record.mode = popts.kind == PrecondKind::None ? "exact" : to_string(popts.mode);
  out.record.h = h;
  out.record.mu = sys.params.mu;
  out.record.k = sys.params.kxx;
  out.record.alpha = sys.params.alpha;
  out.record.iterations = report.iterations;
  out.record.converged = report.converged;
  out.record.wall_time_s = report.wall_seconds;
  out.record.setup_time_s = P->setup_seconds();
  out.report = report;
  return out;
}

SolveOutcome run_benchmark_solve(const SolveSetup& setup) {
  const BlockSystem sys = assemble_benchmark(setup.condition, setup.h, setup.params);
  return run_benchmark_solve(sys, setup.h, setup.precond, setup.solver);
}

ConvergenceTable convergence_study(Condition condition, const PhysicalParams& base,
                                   const std::vector<double>& hs) {
  if (hs.size() < 2) throw ConfigError("convergence_study: need at least two mesh sizes");
  ConvergenceTable table;
  table.condition = condition;
  PhysicalParams p = base;
  p.condition = condition;
  for (double h : hs) {
    const ManufacturedSolution mms(p);
    const StaggeredGrid grid = build_grid(spec_from_h(h));
    const BlockSystem sys = assemble_coupled(grid, p, mms.sources());

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::SparseMatrix<double> M(sys.monolithic);
    lu.compute(M);
    if (lu.info() != Eigen::Success) {
      throw FactorizationError("convergence_study: sparse LU failed at h = " + fmt("%g", h));
    }
    const Vector x = lu.solve(sys.rhs);
    table.rows.push_back({h, discrete_errors(grid, mms, x)});
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.h > b.h; });
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    const FieldErrors& c = table.rows[i].errors;
    const FieldErrors& f = table.rows[i + 1].errors;
    const double ratio = table.rows[i].h / table.rows[i + 1].h;
    const double denom = std::log2(ratio);
    FieldErrors ord;
    ord.velocity = std::log2(c.velocity / f.velocity) / denom;
    ord.p_ff = std::log2(c.p_ff / f.p_ff) / denom;
    ord.p_pm = std::log2(c.p_pm / f.p_pm) / denom;
    table.orders.push_back(ord);
  }
  return table;
}

std::vector<TableRecord> efficiency_table(double h, const PhysicalParams& base,
                                          const SolverConfig& scfg) {
  std::vector<TableRecord> records;
  for (Condition cond : {Condition::BJ, Condition::BJS}) {
    const BlockSystem sys = assemble_benchmark(cond, h, base);
    for (PrecondMode mode : {PrecondMode::Exact, PrecondMode::Inexact}) {
      for (PrecondKind kind : {PrecondKind::Diag, PrecondKind::Tri, PrecondKind::Con}) {
        PrecondOptions popts;
        popts.kind = kind;
        popts.mode = mode;
        records.push_back(run_benchmark_solve(sys, h, popts, scfg).record);
      }
    }
  }
  return records;
}

std::vector<TableRecord> h_robustness_table(const std::vector<double>& hs,
                                            const PhysicalParams& base,
                                            const SolverConfig& scfg) {
  std::vector<TableRecord> records;
  for (double h : hs) {
    for (Condition cond : {Condition::BJ, Condition::BJS}) {
      const BlockSystem sys = assemble_benchmark(cond, h, base);
      for (PrecondKind kind : {PrecondKind::Diag, PrecondKind::Tri, PrecondKind::Con}) {
        PrecondOptions popts;
        popts.kind = kind;
        popts.mode = PrecondMode::Inexact;
        records.push_back(run_benchmark_solve(sys, h, popts, scfg).record);
      }
    }
  }
  return records;
}

std::size_t SweepSpec::combinations() const {
  return conditions.size() * kinds.size() * hs.size() * mus.size() * ks.size() * alphas.size();
}

SweepSpec parse_sweep_config(std::istream& in) {
  SweepSpec spec;
  std::string line;
  int lineno = 0;
  std::map<std::string, bool> seen;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" +
                        line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    if (seen[key]) {
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    seen[key] = true;

    const std::vector<std::string> items = split_list(value);
    auto doubles = [&] {
      std::vector<double> v;
      for (const std::string& s : items) v.push_back(parse_double(s, lineno));
      if (v.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty list");
      return v;
    };
    try {
      if (key == "condition") {
        spec.conditions.clear();
        for (const std::string& s : items) spec.conditions.push_back(parse_condition(s));
      } else if (key == "precond") {
        spec.kinds.clear();
        for (const std::string& s : items) spec.kinds.push_back(parse_precond_kind(s));
      } else if (key == "mode") {
        spec.mode = parse_precond_mode(value);
      } else if (key == "h") {
        spec.hs = doubles();
      } else if (key == "mu") {
        spec.mus = doubles();
      } else if (key == "k") {
        spec.ks = doubles();
      } else if (key == "alpha") {
        spec.alphas = doubles();
      } else if (key == "tol") {
        spec.tol = parse_double(value, lineno);
      } else if (key == "restart") {
        spec.restart = parse_int(value, lineno);
      } else if (key == "maxit") {
        spec.maxit = parse_int(value, lineno);
      } else if (key == "budget") {
        spec.budget = static_cast<std::size_t>(parse_int(value, lineno));
      } else if (key == "output") {
        spec.output = value;
      } else {
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                          "' (known: condition precond mode h mu k alpha tol restart maxit "
                          "budget output)");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return spec;
}

SweepSpec load_sweep_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse_sweep_config(in);
}

std::vector<TableRecord> run_sweep(const SweepSpec& spec) {
  if (spec.combinations() > spec.budget) {
    throw ConfigError("sweep has " + std::to_string(spec.combinations()) +
                      " combinations, over the budget of " + std::to_string(spec.budget) +
                      "; raise `budget` explicitly to proceed");
  }
  SolverConfig scfg;
  scfg.tol = spec.tol;
  scfg.restart = spec.restart;
  scfg.maxit = spec.maxit;
  scfg.record_history = false;

  std::vector<TableRecord> records;
  for (double h : spec.hs) {
    for (Condition cond : spec.conditions) {
      for (double mu : spec.mus) {
        for (double k : spec.ks) {
          for (double alpha : spec.alphas) {
            PhysicalParams p;
            p.mu = mu;
            p.kxx = k;
            p.kyy = k;
            p.alpha = alpha;
            p.condition = cond;
            const BlockSystem sys = assemble_benchmark(cond, h, p);
            for (PrecondKind kind : spec.kinds) {
              PrecondOptions popts;
              popts.kind = kind;
              popts.mode = spec.mode;
              try {
                records.push_back(run_benchmark_solve(sys, h, popts, scfg).record);
              } catch (const ConvergenceError&) {
                TableRecord rec;
                rec.condition = to_string(cond);
                rec.precond = to_string(kind);
                rec.mode = to_string(spec.mode);
                rec.h = h;
                rec.mu = mu;
                rec.k = k;
                rec.alpha = alpha;
                rec.iterations = 0;
                rec.converged = false;
                records.push_back(rec);
              }
            }
          }
        }
      }
    }
  }
  return records;
}

}  // namespace sd
