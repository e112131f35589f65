#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cqi/classical.hpp"
#include "cqi/fisher.hpp"
#include "cqi/fock.hpp"
#include "cqi/gaussian.hpp"
#include "cqi/semigroups.hpp"
#include "cqi/verify.hpp"

namespace cqi::verify {

namespace {

using Rho = DensityMatrix<double>;
using Kind = SemigroupKind<double>;
using Params = std::map<std::string, double>;
using Health = HealthMetrics<double>;

constexpr double kPi = 3.14159265358979323846;
const double kE = std::exp(1.0);
const double kTwoPiE = 2 * kPi * kE;
const double kFourPiE = 4 * kPi * kE;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr const char* kVersion = "1.0.0";

// ---------------------------------------------------------------------------
// Case plumbing

struct Outcome {
  std::string label;
  double margin = 0;
  double tolerance = 0;
  bool asserted = true;
  Params params;
  Health health;
  std::string note;
};

/// A unit of work producing one or more margins; a throw fails the whole unit.
struct Unit {
  std::string descriptor;
  Params params;
  double tolerance = 0;
  bool asserted = true;
  std::function<std::vector<Outcome>()> eval;
};

class Builder {
 public:
  explicit Builder(const SuiteConfig& cfg) : cfg_(cfg) {}

  /// Single margin, checked against `tol`.
  void add(std::string descriptor, Params params, double tol, std::function<Outcome()> f, bool asserted = true) {
    units_.push_back({std::move(descriptor), std::move(params), tol, asserted, [f, tol, asserted] {
                        Outcome o = f();
                        if (o.tolerance == 0) o.tolerance = tol;
                        o.asserted = asserted;
                        return std::vector<Outcome>{o};
                      }});
  }

  /// Several margins from one shared computation; each outcome carries its own tolerance.
  void add_group(std::string descriptor, Params params, std::function<std::vector<Outcome>()> f) {
    units_.push_back({std::move(descriptor), std::move(params), 0, true, std::move(f)});
  }

  std::vector<CaseRecord> run() const {
    std::vector<CaseRecord> out;
    const double edge_tol = cfg_.extra_or("edge_tolerance", kDefaultEdgeTolerance);
    for (const auto& u : units_) {
      try {
        for (auto& o : u.eval()) {
          CaseRecord rec;
          rec.index = static_cast<int>(out.size());
          rec.descriptor = o.label.empty() ? u.descriptor : u.descriptor + " / " + o.label;
          rec.parameters = u.params;
          for (const auto& [k, v] : o.params) rec.parameters[k] = v;
          rec.margin = o.margin;
          rec.tolerance = o.tolerance;
          rec.asserted = o.asserted;
          rec.health = o.health;
          rec.note = o.note;
          if (!std::isfinite(rec.margin) && rec.margin != kInf) {
            rec.error = "non-finite margin";
            rec.margin = -kInf;
          }
          if (rec.health.edge_mass > edge_tol) {
            rec.error = "edge mass " + format_real(rec.health.edge_mass) + " exceeds tolerance";
            rec.margin = -kInf;
          }
          out.push_back(std::move(rec));
        }
      } catch (const std::exception& e) {
        CaseRecord rec;
        rec.index = static_cast<int>(out.size());
        rec.descriptor = u.descriptor;
        rec.parameters = u.params;
        rec.margin = -kInf;
        rec.tolerance = u.tolerance;
        rec.asserted = u.asserted;
        rec.error = e.what();
        out.push_back(std::move(rec));
      }
    }
    return out;
  }

 private:
  const SuiteConfig& cfg_;
  std::vector<Unit> units_;
};

Outcome margin_of(double m, Health h = {}, std::string note = {}) {
  Outcome o;
  o.margin = m;
  o.health = h;
  o.note = std::move(note);
  return o;
}

Outcome labelled(std::string label, double m, double tol, bool asserted = true, Health h = {}) {
  Outcome o;
  o.label = std::move(label);
  o.margin = m;
  o.tolerance = tol;
  o.asserted = asserted;
  o.health = h;
  return o;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::uint64_t case_seed(const SuiteConfig& cfg, int i) { return cfg.seed * 1000003ULL + static_cast<std::uint64_t>(i); }

Rho random_case(const SuiteConfig& cfg, int i, RandomFamily family) {
  return random_state<double>(cfg.dim, case_seed(cfg, i), family);
}

RandomFamily cycle_family(int i) {
  static const RandomFamily fams[] = {RandomFamily::FullRank, RandomFamily::Diagonal, RandomFamily::PureMixedEps};
  return fams[i % 3];
}

const char* family_name(RandomFamily f) {
  switch (f) {
    case RandomFamily::FullRank: return "full-rank";
    case RandomFamily::Diagonal: return "diagonal";
    case RandomFamily::PureMixedEps: return "pure-mixed";
  }
  return "";
}

std::string describe_random(RandomFamily f, const SuiteConfig& cfg, int i) {
  return std::string("random ") + family_name(f) + " seed " + std::to_string(case_seed(cfg, i));
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

SolverOptions<double> numeric_solver() {
  SolverOptions<double> o;
  o.closed_form_fast_path = false;
  return o;
}

Index thermal_dim(double n, long base) {
  return std::max<Index>(base, thermal_min_dim(n, 1e-13) + 16);
}

/// D(omega_a || omega_b) in closed form.
double thermal_relent(double a, double b) {
  return -g_entropy(a) + a * std::log1p(1 / b) + std::log1p(b);
}

/// Dimension for thermal sentinels passed through a dense convolution: small
/// enough that the convolved tail populations stay above the rank threshold.
Index sentinel_dim(const SuiteConfig& cfg) { return static_cast<Index>(cfg.extra_or("sentinel_dim", 56)); }

double fisher(const Rho& rho, const SuiteConfig& cfg) {
  return quantum_fisher(rho, cfg.extra_or("fisher_h", kDefaultFisherStep)).value;
}

// ---------------------------------------------------------------------------
// Suites

void data_processing(const SuiteConfig& cfg, Builder& b) {
  const int order = static_cast<int>(cfg.extra_or("quad_order", kDefaultQuadOrder));
  b.add("sentinel thermal omega_1 vs omega_2 under f_Z", {{"t", 0.1}}, cfg.tolerance, [&cfg, order] {
    const double t = 0.1;
    const auto f = GaussianDensity<double>::standard();
    const Index d = sentinel_dim(cfg);
    const auto a = convolve<double>(f, thermal_state(1.0, d, 1e-9), t, order);
    const auto c = convolve<double>(f, thermal_state(2.0, d, 1e-9), t, order);
    const double numeric = relative_entropy(a, c);
    const double closed = thermal_relent(1 + 2 * kPi * t, 2 + 2 * kPi * t);
    return margin_of(-std::abs(numeric - closed), truncation_health(c));
  });
  b.add("closed-form thermal contraction", {{"t", 0.1}}, cfg.tolerance, [] {
    const double t = 0.1;
    return margin_of(thermal_relent(1, 2) - thermal_relent(1 + 2 * kPi * t, 2 + 2 * kPi * t));
  });
  for (int i = 0; i < cfg.cases; ++i) {
    const double t = cfg.time_grid.empty() ? 0.1 : cfg.time_grid[i % cfg.time_grid.size()];
    b.add(describe_random(RandomFamily::FullRank, cfg, i) + " with Gaussian pair", {{"t", t}}, cfg.tolerance,
          [&cfg, i, t, order] {
            std::mt19937_64 rng(case_seed(cfg, i) ^ 0xD1B54A32D192ED03ULL);
            std::uniform_real_distribution<double> shift(-0.2, 0.2), var(0.5, 1.5), ang(0, kPi);
            auto draw = [&] {
              const double th = ang(rng);
              Mat2<double> o;
              o << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
              Mat2<double> d = Mat2<double>::Zero();
              d(0, 0) = var(rng);
              d(1, 1) = var(rng);
              return GaussianDensity<double>::make(Vec2<double>(shift(rng), shift(rng)), o * d * o.transpose());
            };
            const auto f = draw();
            const auto g = draw();
            const auto rho = random_case(cfg, i, RandomFamily::FullRank);
            const auto sigma = random_case(cfg, i + 50000, RandomFamily::FullRank);
            const auto fr = convolve<double>(f, rho, t, order);
            const auto gs = convolve<double>(g, sigma, t, order);
            const double lhs = relative_entropy(fr, gs);
            const double rhs = gaussian_density_divergence(f, g) + relative_entropy(rho, sigma);
            Health h = truncation_health(fr);
            h.edge_mass = std::max(h.edge_mass, truncation_health(gs).edge_mass);
            return margin_of(rhs - lhs, h);
          });
  }
}

void stam(const SuiteConfig& cfg, Builder& b) {
  const int order = static_cast<int>(cfg.extra_or("quad_order", kDefaultQuadOrder));
  const auto fz = GaussianDensity<double>::standard();
  b.add("sentinel omega_1, f_Z: numeric vs closed form", {{"t", 0.05}, {"n", 1}}, cfg.tolerance, [&cfg, fz, order] {
    const double t = 0.05;
    const double closed = 1 / thermal_fisher_closed(1 + 2 * kPi * t) - 1 / thermal_fisher_closed(1.0) - t / 2;
    const double numeric = stam_margin(fz, thermal_state(1.0, sentinel_dim(cfg)), t, kDefaultFisherStep, order);
    return margin_of(-std::abs(numeric - closed));
  });
  b.add("closed-form omega_1, f_Z", {{"t", 0.05}, {"n", 1}}, cfg.tolerance, [] {
    const double t = 0.05;
    return margin_of(1 / thermal_fisher_closed(1 + 2 * kPi * t) - 1 / thermal_fisher_closed(1.0) - t / 2);
  });
  for (int i = 0; i < cfg.cases; ++i) {
    for (double t : cfg.time_grid) {
      b.add(describe_random(RandomFamily::FullRank, cfg, i) + ", f_Z", {{"t", t}}, cfg.tolerance,
            [&cfg, i, t, fz, order] {
              const auto rho = random_case(cfg, i, RandomFamily::FullRank);
              const auto mixed = convolve<double>(fz, rho, t, order);
              const double m = 1 / fisher(mixed, cfg) - 1 / fisher(rho, cfg) - t / classical_fisher_gaussian(fz.cov);
              return margin_of(m, truncation_health(mixed));
            });
    }
  }
}

/// Relative gap |2 dS/dt - J| / J along heat flow, plus the sum identity.
std::vector<Outcome> de_bruijn_outcomes(const Rho& rho, const SuiteConfig& cfg) {
  const double j = fisher(rho, cfg);
  const double rate = entropy_rate(rho, Kind::heat(), kDefaultRateStep, numeric_solver()).value;
  const double jm = entropy_rate(rho, Kind::attenuator(), kDefaultRateStep, numeric_solver()).value;
  const double jp = entropy_rate(rho, Kind::amplifier(), kDefaultRateStep, numeric_solver()).value;
  const Health h = truncation_health(rho);
  return {labelled("2 dS/dt vs J", -rel_diff(rate, j), cfg.tolerance, true, h),
          labelled("2 pi (J_- + J_+) vs J", -rel_diff(2 * kPi * (jm + jp), j), cfg.tolerance, true, h)};
}

void de_bruijn(const SuiteConfig& cfg, Builder& b) {
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    b.add_group("thermal n=" + fmt(n), {{"n", n}}, [&cfg, n] {
      const auto rho = thermal_state(n, cfg.dim);
      auto out = de_bruijn_outcomes(rho, cfg);
      out.push_back(labelled("sentinel J vs 4 pi log(1+1/n)", -rel_diff(fisher(rho, cfg), thermal_fisher_closed(n)),
                             cfg.tolerance));
      return out;
    });
  }
  for (int i = 0; i < cfg.cases; ++i)
    b.add_group(describe_random(RandomFamily::FullRank, cfg, i), {},
                [&cfg, i] { return de_bruijn_outcomes(random_case(cfg, i, RandomFamily::FullRank), cfg); });
}

/// Forward Richardson estimate of d/dt [J(e^{t L_heat} rho)/2]^{-1} at 0.
double fisher_isoperimetric_derivative(const Rho& rho, const SuiteConfig& cfg) {
  const double tau = cfg.extra_or("tau", 1e-2);
  const auto inv = [&](double t) {
    const auto x = t == 0 ? rho : evolve(rho, Kind::heat(), t, numeric_solver());
    return 2 / fisher(x, cfg);
  };
  const double f0 = inv(0);
  const double d1 = (inv(tau) - f0) / tau;
  const double d2 = (inv(tau / 2) - f0) / (tau / 2);
  return 2 * d2 - d1;
}

void fisher_isoperimetry(const SuiteConfig& cfg, Builder& b) {
  const double closed_tol = cfg.extra_or("closed_tolerance", 1e-4);
  const double thermal_tol = cfg.extra_or("thermal_tolerance", 2e-2);
  b.add("closed form n=100", {{"n", 100}}, closed_tol,
        [] { return margin_of(-std::abs(fisher_isoperimetric_ratio(100.0) - 1)); });
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    b.add_group("thermal n=" + fmt(n), {{"n", n}}, [&cfg, n, thermal_tol] {
      const double d = fisher_isoperimetric_derivative(thermal_state(n, cfg.dim), cfg);
      return std::vector<Outcome>{labelled("derivative >= 1", d - 1, cfg.tolerance),
                                  labelled("numeric vs closed form", -rel_diff(d, fisher_isoperimetric_ratio(n)),
                                           thermal_tol)};
    });
  }
  for (int i = 0; i < cfg.cases; ++i)
    b.add(describe_random(RandomFamily::FullRank, cfg, i), {}, cfg.tolerance, [&cfg, i] {
      const auto rho = random_case(cfg, i, RandomFamily::FullRank);
      return margin_of(fisher_isoperimetric_derivative(rho, cfg) - 1, truncation_health(rho));
    });
}

double second_difference_entropy_power(const Rho& rho, double h) {
  const auto n1 = entropy_power(evolve(rho, Kind::heat(), h, numeric_solver()));
  const auto n2 = entropy_power(evolve(rho, Kind::heat(), 2 * h, numeric_solver()));
  return entropy_power(rho) - 2 * n1 + n2;
}

void concavity(const SuiteConfig& cfg, Builder& b) {
  const double h = cfg.extra_or("h", 5e-3);
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    b.add_group("thermal n=" + fmt(n), {{"n", n}, {"h", h}}, [&cfg, n, h] {
      const double numeric = second_difference_entropy_power(thermal_state(n, cfg.dim), h);
      const double closed = thermal_entropy_power_closed(n) - 2 * thermal_entropy_power_closed(n + 2 * kPi * h) +
                            thermal_entropy_power_closed(n + 4 * kPi * h);
      return std::vector<Outcome>{labelled("second difference <= 0", -numeric, cfg.tolerance),
                                  labelled("sentinel numeric vs closed form", -std::abs(numeric - closed), 1e-6)};
    });
  }
  for (int i = 0; i < cfg.cases; ++i)
    b.add(describe_random(RandomFamily::FullRank, cfg, i), {{"h", h}}, cfg.tolerance, [&cfg, i, h] {
      const auto rho = random_case(cfg, i, RandomFamily::FullRank);
      return margin_of(-second_difference_entropy_power(rho, h), truncation_health(rho));
    });
}

void epi_heat(const SuiteConfig& cfg, Builder& b) {
  const double numeric_tol = cfg.extra_or("numeric_tolerance", 1e-2);
  const double slope_tol = cfg.extra_or("slope_tolerance", 1e-2);
  for (double n : {0.5, 1.0, 2.0}) {
    for (double t : cfg.time_grid) {
      b.add("thermal n=" + fmt(n) + " closed-form path", {{"n", n}, {"t", t}}, cfg.tolerance, [&cfg, n, t] {
        const auto rho = thermal_state(n, cfg.dim);
        const auto out = evolve(rho, Kind::heat(), t);
        return margin_of(entropy_power(out) - entropy_power(rho) - kTwoPiE * t, truncation_health(out));
      });
    }
  }
  b.add("sentinel numeric heat flow vs closed form, n=1", {{"n", 1}, {"t", 0.05}}, 1e-6, [&cfg] {
    const auto out = evolve(thermal_state(1.0, cfg.dim), Kind::heat(), 0.05, numeric_solver());
    return margin_of(-std::abs(entropy_power(out) - thermal_entropy_power_closed(1 + 2 * kPi * 0.05)),
                     truncation_health(out));
  });
  b.add("asymptotic slope of N over t in [2,4], n=1", {{"n", 1}}, slope_tol, [] {
    const double slope =
        (thermal_entropy_power_closed(1 + 2 * kPi * 4.0) - thermal_entropy_power_closed(1 + 2 * kPi * 2.0)) / 2;
    return margin_of(-rel_diff(slope, kTwoPiE));
  });
  for (int i = 0; i < cfg.cases; ++i) {
    for (double t : cfg.time_grid) {
      b.add(describe_random(RandomFamily::FullRank, cfg, i) + " numeric path", {{"t", t}}, numeric_tol,
            [&cfg, i, t] {
              const auto rho = random_case(cfg, i, RandomFamily::FullRank);
              const auto out = evolve(rho, Kind::heat(), t, numeric_solver());
              return margin_of(entropy_power(out) - entropy_power(rho) - kTwoPiE * t, truncation_health(out));
            });
    }
  }
}

void entropy_isoperimetry(const SuiteConfig& cfg, Builder& b) {
  const double closed_tol = cfg.extra_or("closed_tolerance", 1e-2);
  b.add("closed form n=100 vs 4 pi e", {{"n", 100}}, closed_tol,
        [] { return margin_of(-rel_diff(entropy_isoperimetric_product(100.0), kFourPiE)); });
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    b.add_group("thermal n=" + fmt(n), {{"n", n}}, [&cfg, n] {
      const auto rho = thermal_state(n, cfg.dim);
      const double prod = fisher(rho, cfg) * entropy_power(rho);
      return std::vector<Outcome>{
          labelled("J N - 4 pi e", prod - kFourPiE, cfg.tolerance),
          labelled("sentinel numeric vs closed form", -rel_diff(prod, entropy_isoperimetric_product(n)), 1e-2)};
    });
  }
  for (int i = 0; i < cfg.cases; ++i)
    b.add(describe_random(RandomFamily::FullRank, cfg, i), {}, cfg.tolerance, [&cfg, i] {
      const auto rho = random_case(cfg, i, RandomFamily::FullRank);
      return margin_of(fisher(rho, cfg) * entropy_power(rho) - kFourPiE, truncation_health(rho));
    });
}

void majorization(const SuiteConfig& cfg, Builder& b) {
  const auto opts = numeric_solver();
  b.add_group("sentinel |1><1|", {}, [&cfg, opts] {
    std::vector<Outcome> out;
    const auto one = number_state<double>(1, cfg.dim);
    const auto down = fock_rearrangement(one);
    out.push_back(labelled("rearrangement is vacuum", -std::abs(down(0, 0).real() - 1), cfg.tolerance));
    for (double t : cfg.time_grid) {
      const auto e = evolve(one, Kind::attenuator(), t, opts);
      const double expected = 1 - std::max(1 - std::exp(-t), std::exp(-t));
      const double m = majorizes<double>(evolve(down, Kind::attenuator(), t, opts), e, MajorizationMode::Full).margins(0);
      out.push_back(labelled("first partial-sum margin vs closed form t=" + fmt(t), -std::abs(m - expected),
                             cfg.tolerance));
    }
    return out;
  });
  for (int i = 0; i < cfg.cases; ++i) {
    const auto fam = cycle_family(i);
    b.add_group(describe_random(fam, cfg, i), {}, [&cfg, i, fam, opts] {
      std::vector<Outcome> out;
      const auto rho = random_case(cfg, i, fam);
      const auto down = fock_rearrangement(rho);
      for (double t : cfg.time_grid) {
        const auto r = majorizes<double>(evolve(down, Kind::attenuator(), t, opts),
                                         evolve(rho, Kind::attenuator(), t, opts), MajorizationMode::Full);
        Outcome o = labelled("e^{tL-} rho < e^{tL-} rho_down", std::min(r.min_margin(), -std::abs(r.trace_gap)),
                             cfg.tolerance);
        o.params["t"] = t;
        out.push_back(o);
      }
      out.push_back(labelled("mean photon decreases", mean_photon(rho) - mean_photon(down), cfg.tolerance));
      out.push_back(labelled("Fock majorization rho <_F rho_down",
                             majorizes(down, rho, MajorizationMode::Fock).min_margin(), cfg.tolerance));
      return out;
    });
  }
}

void correspondence(const SuiteConfig& cfg, Builder& b) {
  const double h = cfg.extra_or("rate_h", kDefaultRateStep);
  for (double n : {0.5, 1.0, 2.0}) {
    b.add_group("geometric n=" + fmt(n), {{"n", n}}, [&cfg, n, h] {
      const double closed = -2 * n * std::log1p(1 / n);
      const double classical = death_entropy_rate(geometric_pmf(n, cfg.dim - 1));
      const double fock =
          entropy_rate(thermal_state(n, cfg.dim), Kind::attenuator(), h, numeric_solver()).value;
      return std::vector<Outcome>{labelled("sentinel classical vs closed form", -std::abs(classical - closed), 1e-8),
                                  labelled("Fock vs classical", -std::abs(fock - classical), cfg.tolerance)};
    });
  }
  for (int i = 0; i < cfg.cases; ++i) {
    b.add(describe_random(RandomFamily::Diagonal, cfg, i) + ": Fock rate vs classical rate", {}, cfg.tolerance,
          [&cfg, i, h] {
            const auto rho = random_case(cfg, i, RandomFamily::Diagonal);
            const double fock = entropy_rate(rho, Kind::attenuator(), h, numeric_solver()).value;
            return margin_of(-std::abs(fock - death_entropy_rate(rho.populations())), truncation_health(rho));
          });
    b.add(describe_random(RandomFamily::FullRank, cfg, i) + ": J_-(rho) >= J_-(rho_down)", {}, cfg.tolerance,
          [&cfg, i, h] {
            const auto rho = random_case(cfg, i, RandomFamily::FullRank);
            const auto down = fock_rearrangement(rho);
            const double j = entropy_rate(rho, Kind::attenuator(), h, numeric_solver()).value;
            const double jd = death_entropy_rate(down.populations());
            return margin_of(j - jd, truncation_health(rho));
          });
  }
}

void geometric_optimality(const SuiteConfig& cfg, Builder& b) {
  const Index k = static_cast<Index>(cfg.extra_or("K", 64));
  const double tv_tol = cfg.extra_or("tv_tolerance", 1e-2);
  const double start_tol = cfg.extra_or("start_tolerance", 1e-6);
  for (double n : {0.5, 1.0, 2.0}) {
    b.add_group("constrained minimum n=" + fmt(n), {{"n", n}, {"K", double(k)}}, [&cfg, n, k, tv_tol, start_tol] {
      MinimizeOptions<double> opts;
      opts.starts = cfg.cases;
      opts.seed = cfg.seed;
      const auto res = min_entropy_rate_constrained(n, k, opts);
      const double closed = -2 * n * std::log1p(1 / n);
      const auto geo = geometric_pmf(n, k);
      const double tv = (res.p_star.probs() - geo.probs()).cwiseAbs().sum() / 2;
      const double jgeo = death_entropy_rate(geo);
      double best_random = kInf;
      for (std::size_t s = 1; s < res.start_values.size(); ++s) best_random = std::min(best_random, res.start_values[s]);
      std::vector<Outcome> out{labelled("j_star vs -2n log(1+1/n)", -std::abs(res.j_star - closed), cfg.tolerance),
                               labelled("j_star >= bound", res.j_star - closed, opts.slack),
                               labelled("argmin total variation to geometric", -tv, tv_tol)};
      if (std::isfinite(best_random))
        out.push_back(labelled("random starts vs geometric", best_random - jgeo, start_tol));
      return out;
    });
    b.add("Fock attenuator rate of omega_n", {{"n", n}}, cfg.tolerance, [&cfg, n] {
      const auto rho = thermal_state(n, thermal_dim(n, 128));
      const double ds = entropy_rate(rho, Kind::attenuator(), kDefaultRateStep, numeric_solver()).value / 2;
      return margin_of(-std::abs(ds + n * std::log1p(1 / n)), truncation_health(rho));
    });
  }
  for (int i = 0; i < cfg.cases; ++i)
    b.add(describe_random(RandomFamily::FullRank, cfg, i) + ": J_- >= -2n log(1+1/n)", {}, cfg.tolerance, [&cfg, i] {
      SuiteConfig c = cfg;
      c.dim = 64;
      const auto rho = random_case(c, i, RandomFamily::FullRank);
      const double n = mean_photon(rho);
      const double j = entropy_rate(rho, Kind::attenuator(), kDefaultRateStep, numeric_solver()).value;
      return margin_of(j + 2 * n * std::log1p(1 / n), truncation_health(rho));
    });
}

void rate_decay_identity(const SuiteConfig& cfg, Builder& b) {
  const double mu = cfg.extra_or("mu", std::sqrt(2.0));
  const double lambda = cfg.extra_or("lambda", 1.0);
  const double gaussian_tol = cfg.extra_or("gaussian_tolerance", 1e-6);
  const double zeta = Kind::qou(mu, lambda).zeta();
  auto identity_case = [&cfg, mu, lambda](const Rho& rho) {
    const auto r = relent_decay_rate(rho, mu, lambda, kDefaultRateStep, numeric_solver());
    return margin_of(-std::abs(r.rate.value - r.rate_from_identity) / std::max(std::abs(r.rate.value), 1e-12),
                     truncation_health(rho));
  };
  b.add("thermal n=2", {{"n", 2}}, cfg.tolerance, [&cfg, identity_case] { return identity_case(thermal_state(2.0, cfg.dim)); });
  b.add("fixed point rate", {}, 1e-6, [&cfg, mu, lambda] {
    const auto sigma = qou_fixed_point(mu, lambda, cfg.dim);
    return margin_of(-std::abs(relent_decay_rate(sigma, mu, lambda, kDefaultRateStep, numeric_solver()).rate.value));
  });
  for (int i = 0; i < cfg.cases; ++i) {
    const auto fam = i % 2 == 0 ? RandomFamily::Diagonal : RandomFamily::FullRank;
    b.add(describe_random(fam, cfg, i), {}, cfg.tolerance,
          [&cfg, i, fam, identity_case] { return identity_case(random_case(cfg, i, fam)); });
  }
  for (double n : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0}) {
    b.add_group("Gaussian rate inequality thermal n=" + fmt(n), {{"n", n}}, [&cfg, n, mu, lambda, zeta, gaussian_tol] {
      const auto rho = thermal_state(n, thermal_dim(n, cfg.dim));
      const auto r = relent_decay_rate(rho, mu, lambda, kDefaultRateStep, numeric_solver());
      const double lhs = -zeta * r.divergence - r.rate.value;
      return std::vector<Outcome>{
          labelled("dD/dt <= -zeta D", lhs, gaussian_tol, true, truncation_health(rho)),
          labelled("numeric vs h(n)", -std::abs(lhs - h_function(n, mu, lambda)), gaussian_tol)};
    });
  }
}

void log_sobolev(const SuiteConfig& cfg, Builder& b) {
  const double mu = cfg.extra_or("mu", std::sqrt(2.0));
  const double lambda = cfg.extra_or("lambda", 1.0);
  const double zeta0 = Kind::qou(mu, lambda).zeta();
  const double a_special = log_sobolev_special_a(mu, lambda);
  auto outcomes = [&cfg, mu, lambda, zeta0, a_special](const Rho& rho) {
    const auto r = relent_decay_rate(rho, mu, lambda, kDefaultRateStep, numeric_solver());
    const double jm = entropy_rate(rho, Kind::attenuator(), kDefaultRateStep, numeric_solver()).value;
    const double jp = entropy_rate(rho, Kind::amplifier(), kDefaultRateStep, numeric_solver()).value;
    const double n = mean_photon(rho);
    const Health h = truncation_health(rho);
    std::vector<Outcome> out;
    for (double zeta : {zeta0, zeta0 / 2}) {
      for (double a : {a_special, a_special / 2, 2 * a_special}) {
        const auto c = log_sobolev_constants(mu, lambda, zeta, a);
        const double lhs = -zeta * r.divergence - r.rate.value;
        const double bound = c.alpha_minus * jm + c.alpha_plus * jp + c.gamma * n + c.delta;
        Outcome o = labelled("bound zeta=" + fmt(zeta) + " A=" + fmt(a), lhs - bound, cfg.tolerance, true, h);
        o.params = {{"zeta", zeta}, {"A", a}};
        out.push_back(o);
      }
    }
    const double lhs0 = -zeta0 * r.divergence - r.rate.value;
    out.push_back(labelled("photon-number form", lhs0 - log_sobolev_photon_bound(n, mu, lambda), cfg.tolerance, true, h));
    return out;
  };
  for (double n : {0.3, 1.0, 3.0})
    b.add_group("thermal n=" + fmt(n), {{"n", n}}, [&cfg, n, outcomes] { return outcomes(thermal_state(n, cfg.dim)); });
  for (int i = 0; i < cfg.cases; ++i) {
    const auto fam = i % 2 == 0 ? RandomFamily::FullRank : RandomFamily::Diagonal;
    b.add_group(describe_random(fam, cfg, i), {}, [&cfg, i, fam, outcomes] { return outcomes(random_case(cfg, i, fam)); });
  }
}

void cou(const SuiteConfig& cfg, Builder& b) {
  const double ratio_tol = cfg.extra_or("ratio_tolerance", 1e-3);
  b.add("fixed point", {{"theta", 1}, {"sigma2", 1}}, cfg.tolerance, [] {
    const auto s = cou_step(ClassicalOUParams<double>::make(1, 1), 0.5, 0.0);
    return margin_of(-std::abs(s.relent) - std::abs(s.rate_margin));
  });
  for (double theta : {0.5, 1.0, 2.0})
    for (double sigma2 : {0.5, 1.0, 2.0})
      for (double var0 : {1e-2, 1e-1, 1.0, 10.0, 1e2, 1e4, 1e6}) {
        b.add_group("grid", {{"theta", theta}, {"sigma2", sigma2}, {"var0", var0}}, [&cfg, theta, sigma2, var0] {
          const auto p = ClassicalOUParams<double>::make(theta, sigma2);
          std::vector<Outcome> out;
          for (double t : cfg.time_grid) {
            const auto s = cou_step(p, var0, t);
            Outcome o = labelled("rate margin", s.rate_margin, cfg.tolerance);
            o.params["t"] = t;
            out.push_back(o);
          }
          // Independent derivative check by central differences in time.
          const double t0 = 0.3, dt = 1e-5;
          const double fd = (cou_step(p, var0, t0 + dt).relent - cou_step(p, var0, t0 - dt).relent) / (2 * dt);
          out.push_back(labelled("sentinel dD/dt vs central difference",
                                 -rel_diff(fd, cou_step(p, var0, t0).relent_rate), 1e-6));
          return out;
        });
      }
  for (double var0 : {1e2, 1e4, 1e6}) {
    const bool asserted = var0 == 1e6;
    b.add("margin / D at var0=" + fmt(var0), {{"var0", var0}}, ratio_tol, [var0] {
      const auto s = cou_step(ClassicalOUParams<double>::make(1, 1), var0, 0.0);
      return margin_of(-std::abs(s.rate_margin / s.relent));
    }, asserted);
  }
}

void threshold_067(const SuiteConfig& cfg, Builder& b) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  const double cap = cfg.extra_or("photon_cap", 0.66);
  b.add("closed-form bound at n=" + fmt(cap), {{"n", cap}}, cfg.tolerance,
        [cap] { return margin_of(log_sobolev_photon_bound(cap, std::sqrt(2.0), 1.0)); });
  b.add("threshold root", {}, 1e-2, [] { return margin_of(-std::abs(threshold_solve(Threshold::Photon067) - 0.672)); });
  RandomStateOptions<double> low;
  low.envelope_nbar_min = 0.05;
  low.envelope_nbar_max = 0.35;
  for (int i = 0; i < cfg.cases; ++i) {
    const auto fam = i % 2 == 0 ? RandomFamily::FullRank : RandomFamily::Diagonal;
    const auto rho = random_state<double>(cfg.dim, case_seed(cfg, i), fam, low);
    const double n = mean_photon(rho);
    const bool in_range = n <= cap;
    b.add(describe_random(fam, cfg, i) + " low photon number", {{"n", n}}, cfg.tolerance,
          [&cfg, rho, mu, lambda] {
            const auto r = relent_decay_rate(rho, mu, lambda, kDefaultRateStep, numeric_solver());
            return margin_of(-r.divergence - r.rate.value, truncation_health(rho));
          },
          in_range);
  }
  b.add("thermal n=0.8: bound value (sign indeterminate)", {{"n", 0.8}}, cfg.tolerance,
        [] { return margin_of(log_sobolev_photon_bound(0.8, std::sqrt(2.0), 1.0), {}, "bound is not informative above the threshold"); },
        false);
  b.add("thermal n=0.8: actual margin", {{"n", 0.8}}, cfg.tolerance, [&cfg, mu, lambda] {
    const auto r = relent_decay_rate(thermal_state(0.8, cfg.dim), mu, lambda, kDefaultRateStep, numeric_solver());
    return margin_of(-r.divergence - r.rate.value);
  }, false);
}

void j_plus_bound(const SuiteConfig& cfg, Builder& b) {
  b.add_group("closed-form grid", {}, [&cfg] {
    double min_jp = kInf, min_z_gap = kInf;
    for (int i = 0; i < 50; ++i) {
      const double kappa = 1 + std::pow(10.0, -3 + 5.0 * i / 49);
      const auto base = j_pm_gaussian(kappa, 1.0);
      for (int j = 0; j < 50; ++j) {
        const double z = 1 + 9.0 * j / 49;
        const auto v = j_pm_gaussian(kappa, z);
        min_jp = std::min(min_jp, v.j_plus - 2);
        min_z_gap = std::min({min_z_gap, v.j_plus - base.j_plus, v.j_minus - base.j_minus});
      }
    }
    return std::vector<Outcome>{labelled("J_+ - 2 on 50x50 grid", min_jp, 1e-12),
                                labelled("z = 1 minimizes J_-/+", min_z_gap, 1e-12)};
  });
  for (double n : {0.5, 1.0, 2.0, 4.0}) {
    b.add_group("thermal n=" + fmt(n), {{"n", n}}, [&cfg, n] {
      const auto rho = thermal_state(n, cfg.dim);
      const auto closed = j_pm_gaussian(2 * n + 1, 1.0);
      const double jp = entropy_rate(rho, Kind::amplifier(), kDefaultRateStep, numeric_solver()).value;
      const double jm = entropy_rate(rho, Kind::attenuator(), kDefaultRateStep, numeric_solver()).value;
      return std::vector<Outcome>{labelled("J_+ - 2", jp - 2, cfg.tolerance, true, truncation_health(rho)),
                                  labelled("sentinel J_+ vs closed form", -rel_diff(jp, closed.j_plus), 1e-3),
                                  labelled("sentinel J_- vs closed form", -rel_diff(jm, closed.j_minus), 1e-3)};
    });
  }
  for (int i = 0; i < cfg.cases; ++i) {
    const auto fam = cycle_family(i);
    b.add(describe_random(fam, cfg, i), {}, cfg.tolerance, [&cfg, i, fam] {
      const auto rho = random_case(cfg, i, fam);
      return margin_of(entropy_rate(rho, Kind::amplifier(), kDefaultRateStep, numeric_solver()).value - 2,
                       truncation_health(rho));
    });
  }
}

struct SuiteEntry {
  const char* name;
  void (*build)(const SuiteConfig&, Builder&);
  long dim;
  int cases;
  double tolerance;
  std::vector<double> time_grid;
  std::map<std::string, double> extra;
};

const std::vector<SuiteEntry>& registry() {
  static const std::vector<SuiteEntry> r = {
      {"data-processing", data_processing, 128, 6, 1e-6, {0.05, 0.1}, {{"quad_order", 40}, {"sentinel_dim", 56}}},
      {"stam", stam, 128, 20, 1e-3, {0.02, 0.05, 0.1}, {{"quad_order", 20}, {"sentinel_dim", 56}}},
      {"de-bruijn", de_bruijn, 128, 10, 2e-2, {}, {}},
      {"fisher-isoperimetry", fisher_isoperimetry, 128, 10, 1e-2, {}, {{"tau", 1e-2}}},
      {"concavity", concavity, 128, 10, 1e-3, {}, {{"h", 5e-3}}},
      {"epi-heat", epi_heat, 128, 10, 1e-3, {0.05, 0.1, 0.5}, {{"numeric_tolerance", 1e-2}}},
      {"entropy-isoperimetry", entropy_isoperimetry, 128, 50, 0.1, {}, {}},
      {"majorization", majorization, 12, 100, 1e-10, {0.1, 0.5, 1.0}, {}},
      {"correspondence", correspondence, 96, 10, 1e-3, {}, {{"rate_h", 1e-4}}},
      {"geometric-optimality", geometric_optimality, 64, 8, 1e-3, {}, {{"K", 64}}},
      {"rate-decay-identity", rate_decay_identity, 128, 5, 1e-3, {}, {{"mu", std::sqrt(2.0)}, {"lambda", 1.0}}},
      {"log-sobolev", log_sobolev, 128, 6, 1e-3, {}, {{"mu", std::sqrt(2.0)}, {"lambda", 1.0}}},
      {"cou", cou, 0, 1, 1e-12, {0.0, 0.1, 1.0, 5.0}, {}},
      {"threshold-0.67", threshold_067, 128, 10, 1e-6, {}, {}},
      {"j-plus-bound", j_plus_bound, 128, 10, 1e-2, {}, {}},
  };
  return r;
}

const SuiteEntry* find_entry(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return &e;
  return nullptr;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : registry()) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

bool is_registered(const std::string& name) { return find_entry(name) != nullptr; }

SuiteConfig default_config(const std::string& name) {
  const auto* e = find_entry(name);
  if (!e) throw InvalidArgument("unknown suite '" + name + "'");
  SuiteConfig c;
  c.suite_name = name;
  c.dim = e->dim;
  c.cases = e->cases;
  c.tolerance = e->tolerance;
  c.time_grid = e->time_grid;
  c.extra = e->extra;
  return c;
}

VerificationReport run_suite(const SuiteConfig& config) {
  const auto* e = find_entry(config.suite_name);
  if (!e) throw InvalidArgument("unknown suite '" + config.suite_name + "'");
  if (!(config.tolerance > 0)) throw InvalidArgument("suite tolerance must be positive");
  if (config.cases < 1) throw InvalidArgument("suite needs at least one case");
  const auto start = std::chrono::steady_clock::now();

  VerificationReport report;
  report.suite_name = config.suite_name;
  report.config = config;
  Builder builder(config);
  e->build(config, builder);
  report.cases = builder.run();
  report.summary = summarize(report.cases);
  report.metadata.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.metadata.timestamp = utc_timestamp();
  report.metadata.version = kVersion;
  return report;
}

}  // namespace cqi::verify
