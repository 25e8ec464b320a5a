// singlerisk: fit, bootstrap, simulate and inspect copula-graphic estimators.
//
// Exit codes: 0 success, 1 unexpected failure, 2 usage, 3 data, 4 estimation.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "report.hpp"
#include "singlerisk.hpp"

namespace {

using namespace singlerisk;
using report::Json;

enum Exit { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kEstimation = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputOptions {
  std::string path;
  std::string x_col = "x";
  std::string delta_col = "delta";
  std::vector<std::string> z_cols;
  int target_risk = 1;
};

struct FitOptions {
  std::string method = "3se-aft";
  std::string family = "weibull";
  std::string tau_grid = "-0.9:0.9:0.05";
  bool events_only = false;
  double tolerance = 1e-4;
};

struct Settings {
  InputOptions input;
  FitOptions fit;
  unsigned threads = 1;
  std::size_t bootstrap = 0;
  std::uint64_t seed = 1;
  double level = 0.95;
  std::string out;
  std::string replicates_csv;
  bool timing = false;
  // simulate / gen
  std::string table = "s2-weibull";
  std::size_t n = 2000;
  double tau = 0.8;
  std::size_t reps = 500;
  std::string format = "json";
  // curve
  std::vector<double> taus{0.0};
  std::string curve_csv;
};

Dataset read_input(const InputOptions& in) {
  ColumnSpec spec;
  spec.x = in.x_col;
  spec.delta = in.delta_col;
  if (!in.z_cols.empty()) spec.z = in.z_cols;
  return pool_risks(load_csv(in.path, spec), in.target_risk);
}

FitConfig make_fit_config(const FitOptions& f, unsigned threads) {
  FitConfig cfg;
  const auto m = parse_method(f.method);
  if (!m) throw UsageError("unknown method '" + f.method + "' (expected 3se-aft, 3se-ph or 2se)");
  const auto fam = parse_family(f.family);
  if (!fam) throw UsageError("unknown family '" + f.family + "'");
  cfg.method = *m;
  cfg.family = *fam;
  try {
    cfg.grid = TauGrid::parse(f.tau_grid);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  if (!(f.tolerance > 0.0)) throw UsageError("tolerance must be positive");
  cfg.options.events_only = f.events_only;
  cfg.options.tolerance = f.tolerance;
  cfg.options.threads = threads;
  return cfg;
}

Json input_echo(const InputOptions& in) {
  return {{"input", in.path},
          {"x_col", in.x_col},
          {"delta_col", in.delta_col},
          {"z_cols", in.z_cols},
          {"target_risk", in.target_risk}};
}

Json fit_echo(const FitOptions& f) {
  return {{"method", f.method},
          {"family", f.family},
          {"tau_grid", f.tau_grid},
          {"events_only", f.events_only},
          {"tolerance", f.tolerance}};
}

void emit(const Json& j, const std::string& path) {
  const auto text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

template <class F>
double timed(F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  body();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

int cmd_fit(const Settings& s, bool with_bootstrap) {
  const auto cfg = make_fit_config(s.fit, s.threads);
  if (with_bootstrap && s.bootstrap < 2) throw UsageError("--bootstrap must be at least 2");
  if (!(s.level > 0.0 && s.level < 1.0)) throw UsageError("--level must lie in (0,1)");
  const auto ds = read_input(s.input);

  Json out = {{"schema_version", report::kSchemaVersion}, {"command", with_bootstrap ? "bootstrap" : "fit"}};
  Json config = input_echo(s.input);
  config.update(fit_echo(s.fit));
  if (with_bootstrap) {
    config["bootstrap"] = s.bootstrap;
    config["seed"] = s.seed;
    config["level"] = s.level;
  }
  out["config"] = config;
  out["data"] = {{"n", ds.size()}, {"k", ds.k()}, {"events", std::count(ds.delta().begin(), ds.delta().end(), 1)}};

  std::optional<FitResult> fit;
  const double fit_seconds = timed([&] { fit = run_fit(ds, cfg); });
  out["fit"] = report::fit_json(*fit, cfg.method);

  double boot_seconds = 0.0;
  if (with_bootstrap) {
    auto inner = cfg;
    inner.options.threads = 1;
    std::optional<BootstrapResult> b;
    boot_seconds = timed([&] {
      b = bootstrap([&](const Dataset& d) { return parameter_vector(run_fit(d, inner)); }, ds, s.bootstrap,
                    s.level, s.seed, s.threads);
    });
    out["bootstrap"] = report::bootstrap_json(*b, parameter_names(cfg.method, ds.k()));
    if (!s.replicates_csv.empty()) {
      auto csv = open_csv(s.replicates_csv);
      const auto names = parameter_names(cfg.method, ds.k());
      csv << "replicate";
      for (const auto& n : names) csv << ',' << n;
      csv << '\n';
      for (std::size_t r = 0; r < b->replicates.size(); ++r) {
        csv << b->replicate_ids[r];
        for (double v : b->replicates[r]) csv << ',' << v;
        csv << '\n';
      }
    }
  }
  if (s.timing) out["wall_time"] = {{"fit_seconds", fit_seconds}, {"bootstrap_seconds", boot_seconds}};
  emit(out, s.out);
  return kOk;
}

void print_table(const McReport& r, const Design& d, double tau, std::ostream& os) {
  os << "design " << d.name << "  n=" << d.dgp.n << "  tau=" << tau << "  reps=" << r.requested
     << "  failures=" << r.failures << "\n";
  os << std::left << std::setw(8) << "" << std::right;
  for (const auto& p : r.parameters) os << std::setw(10) << p.name;
  os << "\n" << std::left << std::setw(8) << "Bias^2" << std::right << std::fixed << std::setprecision(4);
  for (const auto& p : r.parameters) os << std::setw(10) << p.bias2;
  os << "\n" << std::left << std::setw(8) << "MSE" << std::right;
  for (const auto& p : r.parameters) os << std::setw(10) << p.mse;
  os << "\n";
}

int cmd_simulate(const Settings& s) {
  if (s.reps < 1) throw UsageError("--reps must be at least 1");
  if (s.n < 2) throw UsageError("--n must be at least 2");
  Design d;
  try {
    d = make_design(s.table, s.tau, s.n);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const auto rep = monte_carlo(d, s.reps, s.seed, s.threads);
  if (s.format == "table") {
    if (s.out.empty() || s.out == "-") {
      print_table(rep, d, s.tau, std::cout);
    } else {
      std::ofstream f(s.out);
      if (!f) throw DataError("cannot write '" + s.out + "'");
      print_table(rep, d, s.tau, f);
    }
    return kOk;
  }
  Json out = {{"schema_version", report::kSchemaVersion},
              {"command", "simulate"},
              {"config",
               {{"table", s.table},
                {"n", s.n},
                {"tau", s.tau},
                {"reps", s.reps},
                {"seed", s.seed},
                {"method", to_string(d.fit.method)},
                {"family", to_string(d.fit.family)},
                {"family_t", to_string(d.dgp.model_t.family)},
                {"family_c", to_string(d.dgp.model_c.family)},
                {"p_z", d.dgp.p_z}}},
              {"report", report::mc_json(rep)}};
  if (s.timing) out["wall_time"] = {{"seconds", rep.wall_seconds}};
  emit(out, s.out);
  return kOk;
}

int cmd_gen(const Settings& s) {
  if (s.n < 2) throw UsageError("--n must be at least 2");
  Design d;
  try {
    d = make_design(s.table, s.tau, s.n);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const auto ds = generate_dataset(d.dgp, s.seed);
  std::ostringstream csv;
  csv << std::setprecision(17) << "x,delta,z1\n";
  for (std::size_t i = 0; i < ds.size(); ++i) csv << ds.x(i) << ',' << ds.delta(i) << ',' << ds.z(i)[0] << '\n';
  if (s.out.empty() || s.out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(s.out);
    if (!f) throw DataError("cannot write '" + s.out + "'");
    f << csv.str();
  }
  return kOk;
}

int cmd_curve(const Settings& s) {
  if (s.taus.empty()) throw UsageError("--tau needs at least one value");
  const auto ds = read_input(s.input);
  const StratifiedFirstStage fs(ds);
  Json curves = Json::array();
  std::optional<std::ofstream> csv;
  if (!s.curve_csv.empty()) {
    csv = open_csv(s.curve_csv);
    *csv << "tau,stratum,time,survival\n";
  }
  for (double tau : s.taus) {
    ClaytonCopula cop(0.0);
    try {
      cop = ClaytonCopula::from_tau(tau);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    const auto cs = fs.curves(cop);
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const auto t = cs[k].curve.jump_times();
      const auto v = cs[k].curve.values();
      curves.push_back({{"tau", tau},
                        {"theta", cop.theta()},
                        {"z", fs.strata()[k].z},
                        {"time", std::vector<double>(t.begin(), t.end())},
                        {"survival", std::vector<double>(v.begin(), v.end())}});
      if (csv)
        for (std::size_t i = 0; i < t.size(); ++i) *csv << tau << ',' << k << ',' << t[i] << ',' << v[i] << '\n';
    }
  }
  Json config = input_echo(s.input);
  config["tau"] = s.taus;
  emit({{"schema_version", report::kSchemaVersion}, {"command", "curve"}, {"config", config}, {"curves", curves}},
       s.out);
  return kOk;
}

int fail(int code, std::string_view kind, const std::string& message) {
  const Json err = {{"schema_version", report::kSchemaVersion},
                    {"error", {{"kind", kind}, {"code", code}, {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

void add_input(CLI::App* c, InputOptions& in) {
  c->add_option("input", in.path, "CSV with duration, risk label and covariate columns")->required();
  c->add_option("--x-col", in.x_col, "duration column")->capture_default_str();
  c->add_option("--delta-col", in.delta_col, "risk label column")->capture_default_str();
  c->add_option("--z-cols", in.z_cols, "covariate columns (default z1, z2, ...)")->delimiter(',');
  c->add_option("--target-risk", in.target_risk, "risk label treated as the event of interest")
      ->capture_default_str();
}

void add_fit(CLI::App* c, Settings& s) {
  c->add_option("--method", s.fit.method, "3se-aft, 3se-ph or 2se")->capture_default_str();
  c->add_option("--family", s.fit.family, "exponential, weibull, loglogistic or lognormal")->capture_default_str();
  c->add_option("--tau-grid", s.fit.tau_grid, "search grid lo:hi:step")->capture_default_str();
  c->add_option("--tol", s.fit.tolerance, "golden-section tolerance in tau")->capture_default_str();
  c->add_flag("--events-only", s.fit.events_only, "score the criterion on event rows only");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-graphic estimation of a single latent risk under dependent competing risks"};
  app.require_subcommand(1);
  Settings s;

  auto* fit = app.add_subcommand("fit", "estimate tau and the marginal model from a CSV");
  add_input(fit, s.input);
  add_fit(fit, s);
  fit->add_option("--threads", s.threads, "worker threads (0 = all cores)")->capture_default_str();
  fit->add_option("--bootstrap", s.bootstrap, "also run B bootstrap replicates");
  fit->add_option("--seed", s.seed, "bootstrap seed")->capture_default_str();
  fit->add_option("--level", s.level, "confidence level")->capture_default_str();
  fit->add_option("--replicates-csv", s.replicates_csv, "dump bootstrap replicates");
  fit->add_option("-o,--out", s.out, "output JSON path (default stdout)");
  fit->add_flag("--timing", s.timing, "include wall-clock times in the output");

  auto* boot = app.add_subcommand("bootstrap", "fit plus bootstrap standard errors and percentile intervals");
  add_input(boot, s.input);
  add_fit(boot, s);
  s.bootstrap = 0;
  boot->add_option("-B,--bootstrap", s.bootstrap, "replicates")->required();
  boot->add_option("--seed", s.seed, "seed")->capture_default_str();
  boot->add_option("--level", s.level, "confidence level")->capture_default_str();
  boot->add_option("--threads", s.threads, "worker threads (0 = all cores)")->capture_default_str();
  boot->add_option("--replicates-csv", s.replicates_csv, "dump bootstrap replicates");
  boot->add_option("-o,--out", s.out, "output JSON path (default stdout)");
  boot->add_flag("--timing", s.timing, "include wall-clock times in the output");

  const std::string tables = [] {
    std::string t;
    for (const auto& n : design_names()) t += (t.empty() ? "" : ", ") + n;
    return t;
  }();
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study of one design");
  sim->add_option("--table", s.table, "design: " + tables)->capture_default_str();
  sim->add_option("--n", s.n, "sample size")->capture_default_str();
  sim->add_option("--tau", s.tau, "true Kendall's tau")->capture_default_str();
  sim->add_option("--reps", s.reps, "replications")->capture_default_str();
  sim->add_option("--seed", s.seed, "seed")->capture_default_str();
  sim->add_option("--threads", s.threads, "worker threads (0 = all cores)")->capture_default_str();
  sim->add_option("--format", s.format, "json or table")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
  sim->add_option("-o,--out", s.out, "output path (default stdout)");
  sim->add_flag("--timing", s.timing, "include wall-clock time in the output");

  auto* gen = app.add_subcommand("gen", "write one simulated sample as CSV");
  gen->add_option("--table", s.table, "design: " + tables)->capture_default_str();
  gen->add_option("--n", s.n, "sample size")->capture_default_str();
  gen->add_option("--tau", s.tau, "true Kendall's tau")->capture_default_str();
  gen->add_option("--seed", s.seed, "seed")->capture_default_str();
  gen->add_option("-o,--out", s.out, "output CSV path (default stdout)");

  auto* curve = app.add_subcommand("curve", "copula-graphic curves per stratum at given tau values");
  add_input(curve, s.input);
  curve->add_option("--tau", s.taus, "tau values (comma separated)")->delimiter(',')->capture_default_str();
  curve->add_option("--csv", s.curve_csv, "also write the curves as CSV");
  curve->add_option("-o,--out", s.out, "output JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  try {
    if (fit->parsed()) return cmd_fit(s, s.bootstrap > 0);
    if (boot->parsed()) return cmd_fit(s, true);
    if (sim->parsed()) return cmd_simulate(s);
    if (gen->parsed()) return cmd_gen(s);
    if (curve->parsed()) return cmd_curve(s);
  } catch (const UsageError& e) {
    return fail(kUsage, "usage", e.what());
  } catch (const DomainError& e) {
    return fail(kUsage, "domain", e.what());
  } catch (const DataError& e) {
    return fail(kData, "data", e.what());
  } catch (const IdentificationError& e) {
    return fail(kEstimation, "identification", e.what());
  } catch (const EstimationError& e) {
    return fail(kEstimation, "estimation", e.what());
  } catch (const std::exception& e) {
    return fail(kInternal, "internal", e.what());
  }
  return kUsage;
}
