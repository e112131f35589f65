// cqverify: run verification suites, emit trajectories and closed-form tables.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cqi/classical.hpp"
#include "cqi/fisher.hpp"
#include "cqi/fock.hpp"
#include "cqi/gaussian.hpp"
#include "cqi/semigroups.hpp"
#include "cqi/verify.hpp"

namespace {

using nlohmann::json;
namespace v = cqi::verify;

constexpr int kExitPass = 0;
constexpr int kExitViolation = 1;
constexpr int kExitError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Global settings after merging built-in defaults, the config file and flags.
struct CliConfig {
  std::optional<long> dim;
  std::optional<std::uint64_t> seed;
  std::optional<int> cases;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  bool metadata = true;
  std::map<std::string, double> extra;
  bool format_from_file = false;
  /// Format chosen explicitly; otherwise trajectories default to CSV.
  bool format_set = false;
};

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return v::round12(x);
}

std::string csv_num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// ---------------------------------------------------------------------------
// Tables: a header plus rows of numbers, rendered as CSV or a JSON array of objects.

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string csv() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_num(r[i]);
      os << '\n';
    }
    return os.str();
  }

  json to_json() const {
    json arr = json::array();
    for (const auto& r : rows) {
      json o = json::object();
      for (std::size_t i = 0; i < r.size(); ++i) o[columns[i]] = num(r[i]);
      arr.push_back(o);
    }
    return arr;
  }
};

void emit(const CliConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw UsageError("cannot open output file '" + cfg.out + "'");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

void emit_json(const CliConfig& cfg, const json& j) { emit(cfg, j.dump(2)); }

void emit_table(const CliConfig& cfg, const Table& t, json header) {
  if (cfg.format == "csv") return emit(cfg, t.csv());
  header["rows"] = t.to_json();
  emit_json(cfg, header);
}

// ---------------------------------------------------------------------------
// Configuration file: {"dim", "seed", "cases", "tol", "out", "format", "metadata", "extra": {...}}

void load_config_file(const std::string& path, CliConfig& cfg) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read config file '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  try {
    if (j.contains("dim")) cfg.dim = j.at("dim").get<long>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cases")) cfg.cases = j.at("cases").get<int>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    if (j.contains("format")) {
      cfg.format = j.at("format").get<std::string>();
      cfg.format_from_file = true;
    }
    if (j.contains("metadata")) cfg.metadata = j.at("metadata").get<bool>();
    if (j.contains("extra"))
      for (const auto& [k, val] : j.at("extra").items()) cfg.extra[k] = val.get<double>();
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
}

/// Inclusive grids "a:b:n" (linear) or "log:a:b:n" (logarithmic).
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  const bool log = !parts.empty() && parts[0] == "log";
  if (log) parts.erase(parts.begin());
  if (parts.size() != 3) throw UsageError("grid must be a:b:n or log:a:b:n, got '" + spec + "'");
  double a = 0, b = 0;
  long n = 0;
  try {
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    n = std::stol(parts[2]);
  } catch (const std::exception&) {
    throw UsageError("grid must be a:b:n or log:a:b:n, got '" + spec + "'");
  }
  if (n < 1 || !(b >= a)) throw UsageError("grid needs n >= 1 and b >= a");
  if (log && !(a > 0)) throw UsageError("log grid needs a > 0");
  std::vector<double> g;
  for (long i = 0; i < n; ++i) {
    const double s = n == 1 ? 0.0 : double(i) / double(n - 1);
    g.push_back(log ? std::exp(std::log(a) + s * (std::log(b) - std::log(a))) : a + s * (b - a));
  }
  return g;
}

cqi::SemigroupKind<double> parse_kind(const std::string& name, double mu, double lambda) {
  using K = cqi::SemigroupKind<double>;
  if (name == "heat") return K::heat();
  if (name == "attenuator") return K::attenuator();
  if (name == "amplifier") return K::amplifier();
  if (name == "qou") return K::qou(mu, lambda);
  throw UsageError("unknown semigroup '" + name + "' (heat, attenuator, amplifier, qou)");
}

// ---------------------------------------------------------------------------
// Subcommands

int run_verify(const CliConfig& cfg, const std::string& suite) {
  if (!v::is_registered(suite)) {
    std::string names;
    for (const auto& n : v::suite_names()) names += (names.empty() ? "" : ", ") + n;
    throw UsageError("unknown suite '" + suite + "'; registered suites: " + names);
  }
  auto sc = v::default_config(suite);
  if (cfg.dim) sc.dim = *cfg.dim;
  if (cfg.seed) sc.seed = *cfg.seed;
  if (cfg.cases) sc.cases = *cfg.cases;
  if (cfg.tol) sc.tolerance = *cfg.tol;
  for (const auto& [k, val] : cfg.extra) sc.extra[k] = val;

  const auto report = v::run_suite(sc);
  emit(cfg, cfg.format == "csv" ? v::to_csv(report) : v::to_json(report, cfg.metadata).dump(2));

  bool backend_error = false;
  for (const auto& c : report.cases) backend_error |= c.asserted && !c.error.empty();
  if (backend_error) return kExitError;
  return report.summary.passed ? kExitPass : kExitViolation;
}

struct TrajectoryArgs {
  std::string kind;
  double n0 = 1, mu = std::sqrt(2.0), lambda = 1, tmax = 1;
  int steps = 10;
  std::string init = "thermal";
};

int run_trajectory(const CliConfig& cfg, const TrajectoryArgs& a) {
  const auto kind = parse_kind(a.kind, a.mu, a.lambda);
  if (!(a.tmax >= 0) || a.steps < 1) throw UsageError("trajectory needs tmax >= 0 and steps >= 1");
  const long dim = cfg.dim.value_or(128);
  cqi::DensityMatrix<double> rho = a.init == "random"
                                       ? cqi::random_state<double>(dim, cfg.seed.value_or(1), cqi::RandomFamily::FullRank)
                                       : cqi::thermal_state(a.n0, dim);
  std::optional<cqi::DensityMatrix<double>> fixed;
  if (kind.name() == "qou") fixed = cqi::qou_fixed_point(a.mu, a.lambda, dim);

  Table t{{"t", "entropy", "entropy_power", "fisher", "mean_photon", "relent_to_fixed"}, {}};
  const double dt = a.tmax / a.steps;
  auto state = rho;
  for (int i = 0; i <= a.steps; ++i) {
    if (i > 0) state = cqi::evolve(state, kind, dt);
    const double rel = fixed ? cqi::relative_entropy(state, *fixed) : std::nan("");
    t.rows.push_back({i * dt, cqi::von_neumann_entropy(state), cqi::entropy_power(state),
                      cqi::quantum_fisher(state).value, cqi::mean_photon(state), rel});
  }
  // Trajectories default to CSV, the plot-data format.
  CliConfig out = cfg;
  if (!cfg.format_set) out.format = "csv";
  emit_table(out, t, {{"semigroup", a.kind}, {"dim", dim}, {"init", a.init}, {"n0", num(a.n0)}});
  return kExitPass;
}

int run_death(const CliConfig& cfg, const std::string& init, double tmax, int steps, std::optional<long> k_opt) {
  const std::string prefix = "geometric:";
  if (init.rfind(prefix, 0) != 0) throw UsageError("--init must be geometric:<n>");
  double n = 0;
  try {
    n = std::stod(init.substr(prefix.size()));
  } catch (const std::exception&) {
    throw UsageError("--init must be geometric:<n>");
  }
  if (!(tmax >= 0) || steps < 1) throw UsageError("death-process needs tmax >= 0 and steps >= 1");
  const long k = k_opt.value_or(cfg.dim.value_or(128) - 1);
  auto p = cqi::geometric_pmf(n, k);
  Table t{{"t", "entropy", "mean", "entropy_rate"}, {}};
  const double dt = tmax / steps;
  for (int i = 0; i <= steps; ++i) {
    if (i > 0) p = cqi::death_evolve(p, dt);
    t.rows.push_back({i * dt, cqi::shannon_entropy(p), cqi::pmf_mean(p), cqi::death_entropy_rate(p)});
  }
  CliConfig out = cfg;
  if (!cfg.format_set) out.format = "csv";
  emit_table(out, t, {{"init", init}, {"K", k}});
  return kExitPass;
}

int run_closed_forms(const CliConfig& cfg, const std::string& which, const std::string& grid_spec, double mu,
                     double lambda, double eps) {
  const std::string spec = !grid_spec.empty() ? grid_spec : which == "carbone" ? "0.05:0.95:19" : "log:0.01:100:21";
  const auto grid = parse_grid(spec);
  Table t;
  json header{{"table", which}, {"grid", spec}};
  const double four_pi_e = 4 * M_PI * std::exp(1.0);
  if (which == "appB") {
    t.columns = {"n", "fisher", "ratio"};
    for (double n : grid) t.rows.push_back({n, cqi::thermal_fisher_closed(n), cqi::fisher_isoperimetric_ratio(n)});
  } else if (which == "appC") {
    t.columns = {"n", "fisher", "entropy_power", "product", "product_over_4pie"};
    for (double n : grid) {
      const double p = cqi::entropy_isoperimetric_product(n);
      t.rows.push_back({n, cqi::thermal_fisher_closed(n), cqi::thermal_entropy_power_closed(n), p, p / four_pi_e});
    }
  } else if (which == "appD") {
    header["mu"] = num(mu);
    header["lambda"] = num(lambda);
    header["eps"] = num(eps);
    t.columns = {"n", "h", "j_minus", "j_plus", "strengthened"};
    for (double n : grid) {
      const auto j = cqi::j_pm_gaussian(2 * n + 1, 1.0);
      t.rows.push_back({n, cqi::h_function(n, mu, lambda), j.j_minus, j.j_plus,
                        cqi::strengthened_rate_expression(n, mu, lambda, eps)});
    }
  } else if (which == "carbone") {
    header["mu"] = num(mu);
    t.columns = {"nu", "lambda", "alpha2_lower", "alpha2_upper", "alpha_c_lower", "alpha_c_upper"};
    for (double nu : grid) {
      if (!(nu > 0 && nu < 1)) throw UsageError("carbone grid values are nu = lambda^2/mu^2 and must lie in (0, 1)");
      const double l = mu * std::sqrt(nu);
      const auto b = cqi::carbone_lsi2_bounds(mu, l);
      t.rows.push_back({nu, l, b.alpha2_lower, b.alpha2_upper, b.alpha_c_lower, b.alpha_c_upper});
    }
  } else {
    throw UsageError("unknown closed-form table '" + which + "' (appB, appC, appD, carbone)");
  }
  emit_table(cfg, t, header);
  return kExitPass;
}

int run_thresholds(const CliConfig& cfg, const std::string& which) {
  v::Threshold th;
  if (which == "entropy")
    th = v::Threshold::Entropy206;
  else if (which == "photon")
    th = v::Threshold::Photon067;
  else
    throw UsageError("--which must be entropy or photon");
  const auto r = v::threshold_analysis(th);
  if (cfg.format == "csv") {
    std::string s = "which,root,residual,sign_changes,photon_number_at_root\n" + which + "," + csv_num(r.root) + "," +
                    csv_num(r.residual) + "," + std::to_string(r.sign_changes) + "," +
                    csv_num(r.photon_number_at_root) + "\n";
    emit(cfg, s);
  } else {
    emit_json(cfg, v::to_json(r, th));
  }
  return kExitPass;
}

int run_minimize(const CliConfig& cfg, double n, std::optional<long> k_opt) {
  cqi::MinimizeOptions<double> opts;
  if (cfg.cases) opts.starts = *cfg.cases;
  if (cfg.seed) opts.seed = *cfg.seed;
  const long k = k_opt.value_or(64);
  const auto r = cqi::min_entropy_rate_constrained(n, k, opts);
  const double closed = -2 * n * std::log1p(1 / n);
  if (cfg.format == "csv") {
    Table t{{"k", "p_star"}, {}};
    for (long i = 0; i <= k; ++i) t.rows.push_back({double(i), r.p_star.probs()(i)});
    emit(cfg, t.csv());
  } else {
    json starts = json::array();
    for (double s : r.start_values) starts.push_back(num(s));
    json p = json::array();
    for (long i = 0; i <= k; ++i) p.push_back(num(r.p_star.probs()(i)));
    emit_json(cfg, {{"n", num(n)},
                    {"K", k},
                    {"j_star", num(r.j_star)},
                    {"closed_form", num(closed)},
                    {"gap", num(r.j_star - closed)},
                    {"best_start", r.best_start},
                    {"converged", r.converged},
                    {"start_values", starts},
                    {"p_star", p}});
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical verification of phase-space entropy and Fisher-information inequalities"};
  app.require_subcommand(1);
  app.fallthrough();

  CliConfig cli;
  long dim = 0;
  std::uint64_t seed = 0;
  int cases = 0;
  double tol = 0;
  std::string out, format, config_path;
  bool no_metadata = false;
  auto* o_dim = app.add_option("--dim", dim, "Fock truncation dimension")->check(CLI::PositiveNumber);
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  auto* o_cases = app.add_option("--cases", cases, "Number of random cases")->check(CLI::PositiveNumber);
  auto* o_tol = app.add_option("--tol", tol, "Suite tolerance")->check(CLI::PositiveNumber);
  auto* o_out = app.add_option("--out", out, "Output path (default stdout)");
  auto* o_format = app.add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--config", config_path, "JSON config file (overrides CQVERIFY_CONFIG)");
  app.add_flag("--no-metadata", no_metadata, "Omit wall time and timestamp for byte-comparable reports");

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  verify->add_option("suite", suite, "Suite name")->required();

  TrajectoryArgs ta;
  auto* traj = app.add_subcommand("trajectory", "Observables along a semigroup trajectory (CSV)");
  traj->add_option("kind", ta.kind, "heat, attenuator, amplifier or qou")->required();
  traj->add_option("--n0", ta.n0, "Initial thermal photon number");
  traj->add_option("--mu", ta.mu, "qOU loss amplitude");
  traj->add_option("--lambda", ta.lambda, "qOU gain amplitude");
  traj->add_option("--tmax", ta.tmax, "Final time");
  traj->add_option("--steps", ta.steps, "Number of output intervals");
  traj->add_option("--init", ta.init, "Initial state")->check(CLI::IsMember({"thermal", "random"}));

  std::string death_init = "geometric:1";
  double death_tmax = 1;
  int death_steps = 10;
  std::optional<long> death_k;
  auto* death = app.add_subcommand("death-process", "Pure-death process from a geometric law (CSV)");
  death->add_option("--init", death_init, "geometric:<n>");
  death->add_option("--tmax", death_tmax, "Final time");
  death->add_option("--steps", death_steps, "Number of output intervals");
  death->add_option("--K", death_k, "Support cutoff (default dim - 1)");

  std::string cf_which, cf_grid;
  double cf_mu = std::sqrt(2.0), cf_lambda = 1, cf_eps = 0.5;
  auto* cf = app.add_subcommand("closed-forms", "Closed-form tables over a grid");
  cf->add_option("table", cf_which, "appB, appC, appD or carbone")->required();
  cf->add_option("--grid", cf_grid, "a:b:n or log:a:b:n (carbone: grid over nu in (0,1))");
  cf->add_option("--mu", cf_mu, "qOU loss amplitude");
  cf->add_option("--lambda", cf_lambda, "qOU gain amplitude");
  cf->add_option("--eps", cf_eps, "Strengthening parameter for appD");

  std::string th_which;
  auto* th = app.add_subcommand("thresholds", "Solve the entropy or photon-number threshold");
  th->add_option("--which", th_which, "entropy or photon")->required();

  double mr_n = 1;
  std::optional<long> mr_k;
  auto* mr = app.add_subcommand("minimize-rate", "Constrained minimum of the death-process entropy rate");
  mr->add_option("--n", mr_n, "Mean constraint")->required();
  mr->add_option("--K", mr_k, "Support cutoff (default 64)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    // Built-in defaults, then the config file, then flags.
    if (config_path.empty())
      if (const char* env = std::getenv("CQVERIFY_CONFIG"); env && *env) config_path = env;
    if (!config_path.empty()) load_config_file(config_path, cli);
    if (*o_dim) cli.dim = dim;
    if (*o_seed) cli.seed = seed;
    if (*o_cases) cli.cases = cases;
    if (*o_tol) cli.tol = tol;
    if (*o_out) cli.out = out;
    if (*o_format) cli.format = format;
    if (no_metadata) cli.metadata = false;
    cli.format_set = *o_format || cli.format_from_file;
    if (cli.format != "json" && cli.format != "csv") throw UsageError("format must be json or csv");

    if (*verify) return run_verify(cli, suite);
    if (*traj) return run_trajectory(cli, ta);
    if (*death) return run_death(cli, death_init, death_tmax, death_steps, death_k);
    if (*cf) return run_closed_forms(cli, cf_which, cf_grid, cf_mu, cf_lambda, cf_eps);
    if (*th) return run_thresholds(cli, th_which);
    if (*mr) return run_minimize(cli, mr_n, mr_k);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kExitError;
  } catch (const cqi::TruncationError& e) {
    std::cerr << "error: " << e.what() << " (suggested dim " << e.suggested_dim() << ")\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
