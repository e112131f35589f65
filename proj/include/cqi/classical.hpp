#pragma once

// Classical pure-death process on {0, ..., K}, its entropy production rate,
// geometric distributions and the energy-constrained rate minimum.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "cqi/errors.hpp"
#include "cqi/fock.hpp"
#include "cqi/gaussian.hpp"

namespace cqi {

template <typename Real = double>
class ClassicalPMF {
 public:
  static ClassicalPMF make(RVector<Real> probs) {
    if (probs.size() < 1) throw InvalidDimension("ClassicalPMF: empty support");
    if (!probs.allFinite() || probs.minCoeff() < 0) throw InvalidArgument("ClassicalPMF: entries must be finite and >= 0");
    if (std::abs(probs.sum() - 1) > Real(1e-12)) throw InvalidArgument("ClassicalPMF: probabilities must sum to 1");
    return ClassicalPMF(std::move(probs));
  }

  const RVector<Real>& probs() const noexcept { return p_; }
  Real operator[](Index k) const { return p_(k); }
  /// Largest level K.
  Index K() const noexcept { return p_.size() - 1; }

 private:
  explicit ClassicalPMF(RVector<Real> p) : p_(std::move(p)) {}
  RVector<Real> p_;
};

/// (C p)_n = -n p_n + (n+1) p_{n+1}; level K only loses mass, so the sum is 0.
template <typename Real>
RVector<Real> death_generator(const RVector<Real>& p) {
  const Index len = p.size();
  RVector<Real> out(len);
  for (Index n = 0; n < len; ++n) {
    out(n) = -Real(n) * p(n);
    if (n + 1 < len) out(n) += Real(n + 1) * p(n + 1);
  }
  return out;
}

template <typename Real>
RVector<Real> death_generator(const ClassicalPMF<Real>& p) {
  return death_generator<Real>(p.probs());
}

/// (C^T x)_m = -m x_m + m x_{m-1}.
template <typename Real>
RVector<Real> death_generator_transpose(const RVector<Real>& x) {
  RVector<Real> out(x.size());
  for (Index m = 0; m < x.size(); ++m) out(m) = -Real(m) * x(m) + (m > 0 ? Real(m) * x(m - 1) : Real(0));
  return out;
}

template <typename Real>
Real shannon_entropy(const RVector<Real>& p) {
  return entropy_of_values<Real>(p);
}

template <typename Real>
Real shannon_entropy(const ClassicalPMF<Real>& p) {
  return shannon_entropy<Real>(p.probs());
}

template <typename Real>
Real pmf_mean(const RVector<Real>& p) {
  Real m = 0;
  for (Index k = 0; k < p.size(); ++k) m += Real(k) * p(k);
  return m;
}

template <typename Real>
Real pmf_mean(const ClassicalPMF<Real>& p) {
  return pmf_mean<Real>(p.probs());
}

/// Fixed-step RK4 for dp/dt = C p. Negativity and normalization drift are
/// reported as errors, never repaired.
template <typename Real>
ClassicalPMF<Real> death_evolve(const ClassicalPMF<Real>& p, Real t, const SolverOptions<Real>& opts = {}) {
  if (!(t >= 0) || !std::isfinite(t)) throw InvalidArgument("death_evolve: t must be finite and >= 0");
  if (t == 0) return p;
  const Real cap = Real(2.5) / std::max(Real(1), Real(2 * p.K()));
  const long steps = static_cast<long>(std::ceil(t / std::min(opts.step, cap)));
  const Real dt = t / Real(steps);
  RVector<Real> x = p.probs();
  for (long s = 0; s < steps; ++s) {
    const RVector<Real> k1 = death_generator<Real>(x);
    const RVector<Real> k2 = death_generator<Real>(RVector<Real>(x + dt / 2 * k1));
    const RVector<Real> k3 = death_generator<Real>(RVector<Real>(x + dt / 2 * k2));
    const RVector<Real> k4 = death_generator<Real>(RVector<Real>(x + dt * k3));
    x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (x.minCoeff() < Real(-1e-10))
      throw StepSizeError("death_evolve: negative probability " + format_real(double(x.minCoeff())) +
                          "; reduce the step");
    if (std::abs(x.sum() - 1) > Real(1e-10)) throw StepSizeError("death_evolve: normalization drift");
  }
  x = x.cwiseMax(Real(0));
  x /= x.sum();
  return ClassicalPMF<Real>::make(std::move(x));
}

/// J_-(p) = 2 dH/dt = -2 sum_n (C p)_n log p_n. Infinite when mass flows
/// into an empty level.
template <typename Real>
Real death_entropy_rate(const RVector<Real>& p) {
  const RVector<Real> cp = death_generator<Real>(p);
  Real acc = 0;
  for (Index n = 0; n < p.size(); ++n) {
    if (p(n) > 0) {
      acc += cp(n) * std::log(p(n));
    } else if (cp(n) > 0) {
      return std::numeric_limits<Real>::infinity();
    }
  }
  return -2 * acc;
}

template <typename Real>
Real death_entropy_rate(const ClassicalPMF<Real>& p) {
  return death_entropy_rate<Real>(p.probs());
}

/// Gradient of J_- on the interior of the simplex: -2 (C^T log p + C p / p).
template <typename Real>
RVector<Real> death_entropy_rate_gradient(const RVector<Real>& p) {
  const RVector<Real> lp = p.array().log();
  const RVector<Real> cp = death_generator<Real>(p);
  return -2 * (death_generator_transpose<Real>(lp) + RVector<Real>(cp.array() / p.array()));
}

inline constexpr double kGeometricTailTolerance = 1e-10;

/// p_k = (1 - r) r^k with r = n/(n+1), renormalized on {0, ..., K}.
template <typename Real>
ClassicalPMF<Real> geometric_pmf(Real n, Index K, Real tail_tol = Real(kGeometricTailTolerance)) {
  if (!(n >= 0) || !std::isfinite(n)) throw InvalidArgument("geometric_pmf: n must be finite and >= 0");
  if (K < 0) throw InvalidDimension("geometric_pmf: K must be >= 0");
  const Real tail = thermal_tail_mass(n, K + 1);
  if (tail > tail_tol) {
    const Index need = thermal_min_dim(n, tail_tol);
    throw TruncationError("geometric_pmf: tail mass " + format_real(double(tail)) + " beyond K = " +
                              std::to_string(K) + "; need K >= " + std::to_string(need - 1),
                          need);
  }
  const Real r = n / (n + 1);
  RVector<Real> p(K + 1);
  Real w = 1;
  for (Index k = 0; k <= K; ++k) {
    p(k) = w;
    w *= r;
  }
  p /= p.sum();
  return ClassicalPMF<Real>::make(std::move(p));
}

/// f(S) = -g^{-1}(S) g'(g^{-1}(S)).
template <typename Real>
Real f_of_H(Real s) {
  if (!(s > 0)) throw InvalidArgument("f_of_H: S must be > 0");
  const Real n = g_inverse(s);
  return -n * g_derivative(n);
}

/// F(S0) = inf over n >= g^{-1}(S0) of mu^2 (-n g'(n)) + zeta g(n), by
/// golden-section search in log n plus an endpoint check.
template <typename Real>
Real F_of_S0(Real s0, Real mu2, Real zeta) {
  if (!(s0 > 0)) throw InvalidArgument("F_of_S0: S0 must be > 0");
  const Real n0 = g_inverse(s0);
  auto phi = [&](Real n) { return mu2 * (-n * g_derivative(n)) + zeta * g_entropy(n); };
  Real a = std::log(n0), b = std::log(std::max(n0 * 2, Real(1e6)));
  const Real ratio = (std::sqrt(Real(5)) - 1) / 2;
  Real c = b - ratio * (b - a), d = a + ratio * (b - a);
  Real fc = phi(std::exp(c)), fd = phi(std::exp(d));
  for (int it = 0; it < 200 && b - a > Real(1e-13); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - ratio * (b - a);
      fc = phi(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + ratio * (b - a);
      fd = phi(std::exp(d));
    }
  }
  return std::min({phi(n0), fc, fd});
}

// ---------------------------------------------------------------------------
// Energy-constrained minimum of J_-

template <typename Real = double>
struct MinimizeOptions {
  int starts = 8;
  std::uint64_t seed = 1;
  int max_iterations = 20000;
  /// Interior floor applied inside the constraint projection.
  Real floor = Real(1e-12);
  Real initial_step = Real(0.1);
  /// Allowed amount by which j_star may fall below the closed-form bound.
  Real slack = Real(1e-6);
};

template <typename Real = double>
struct MinimizeResult {
  ClassicalPMF<Real> p_star;
  Real j_star = 0;
  std::vector<Real> start_values;
  int best_start = 0;
  bool converged = true;
};

namespace detail {

/// Exponential tilt y_k e^{-beta k} with floor, beta >= 0 chosen by bisection so E[N] <= n.
template <typename Real>
RVector<Real> tilt_to_mean(const RVector<Real>& log_y, Real nbar, Real floor) {
  const Index len = log_y.size();
  auto make = [&](Real beta) {
    RVector<Real> lw(len);
    for (Index k = 0; k < len; ++k) lw(k) = log_y(k) - beta * Real(k);
    RVector<Real> w = (lw.array() - lw.maxCoeff()).exp();
    w /= w.sum();
    w = w.cwiseMax(floor);
    return RVector<Real>(w / w.sum());
  };
  RVector<Real> w = make(0);
  if (pmf_mean<Real>(w) <= nbar) return w;
  Real lo = 0, hi = 1;
  while (pmf_mean<Real>(make(hi)) > nbar) {
    hi *= 2;
    if (hi > Real(1e6)) throw ConvergenceError("tilt_to_mean: constraint unreachable");
  }
  for (int it = 0; it < 100 && hi - lo > Real(1e-15) * hi; ++it) {
    const Real mid = (lo + hi) / 2;
    if (pmf_mean<Real>(make(mid)) > nbar) lo = mid; else hi = mid;
  }
  return make(hi);
}

/// Exponentiated-gradient descent with backtracking on {p > 0, E[N] <= n}.
template <typename Real>
std::pair<RVector<Real>, bool> mirror_descent(RVector<Real> p, Real nbar, const MinimizeOptions<Real>& opts) {
  p = tilt_to_mean<Real>(RVector<Real>(p.array().log()), nbar, opts.floor);
  Real f = death_entropy_rate<Real>(p);
  Real eta = opts.initial_step;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const RVector<Real> grad = death_entropy_rate_gradient<Real>(p);
    RVector<Real> q;
    Real fq;
    for (;;) {
      q = tilt_to_mean<Real>(RVector<Real>(p.array().log() - eta * grad.array()), nbar, opts.floor);
      fq = death_entropy_rate<Real>(q);
      if (fq <= f) break;
      eta /= 2;
      if (eta < Real(1e-16)) return {p, true};
    }
    const Real decrease = f - fq;
    p = std::move(q);
    f = fq;
    if (decrease < Real(1e-15)) return {p, true};
    eta *= Real(1.2);
  }
  return {p, false};
}

}  // namespace detail

/// Minimizes J_-(p) over strictly positive p on {0..K} with E[N] <= n. The first
/// start is geometric(n); the rest are Dirichlet(1) draws.
template <typename Real>
MinimizeResult<Real> min_entropy_rate_constrained(Real nbar, Index K, const MinimizeOptions<Real>& opts = {}) {
  if (!(nbar > 0)) throw InvalidArgument("min_entropy_rate_constrained: n must be > 0");
  if (opts.starts < 1) throw InvalidArgument("min_entropy_rate_constrained: need at least one start");
  const auto geo = geometric_pmf<Real>(nbar, K);
  std::mt19937_64 rng(opts.seed);
  std::exponential_distribution<Real> expo(1);

  MinimizeResult<Real> res{geo, std::numeric_limits<Real>::infinity(), {}, 0, true};
  RVector<Real> best;
  bool any_converged = false;
  for (int s = 0; s < opts.starts; ++s) {
    RVector<Real> p0(K + 1);
    if (s == 0) {
      p0 = geo.probs();
    } else {
      for (Index k = 0; k <= K; ++k) p0(k) = expo(rng);
      p0 /= p0.sum();
    }
    const auto [p, ok] = detail::mirror_descent<Real>(p0, nbar, opts);
    any_converged = any_converged || ok;
    const Real j = death_entropy_rate<Real>(p);
    res.start_values.push_back(j);
    if (j < res.j_star) {
      res.j_star = j;
      res.best_start = s;
      best = p;
    }
  }
  if (!any_converged)
    throw ConvergenceError("min_entropy_rate_constrained: no start converged; best J_- = " +
                           format_real(double(res.j_star)));
  res.converged = any_converged;
  best /= best.sum();
  res.p_star = ClassicalPMF<Real>::make(std::move(best));
  return res;
}

}  // namespace cqi
