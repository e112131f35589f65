#pragma once

// Closed-form Gaussian calculus: thermal entropies, Fisher limits, covariance
// evolution, entropy-production rates, qOU divergence identities, the
// classical Ornstein-Uhlenbeck benchmark and log-Sobolev constants.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "cqi/errors.hpp"
#include "cqi/fock.hpp"
#include "cqi/semigroups.hpp"

namespace cqi {

/// g(n) = (n+1) log(n+1) - n log n, the entropy of the thermal state with mean n.
template <typename Real>
Real g_entropy(Real n) {
  if (!(n >= 0)) throw InvalidArgument("g_entropy: n must be >= 0");
  if (n == 0) return 0;
  // Regrouped to avoid cancellation between (n+1) log(n+1) and n log n.
  return std::log1p(n) + n * std::log1p(1 / n);
}

/// g'(n) = log(1 + 1/n).
template <typename Real>
Real g_derivative(Real n) {
  if (!(n > 0)) throw InvalidArgument("g_derivative: n must be > 0");
  return std::log1p(1 / n);
}

/// Inverse of g by Newton's method kept inside a bisection bracket.
template <typename Real>
Real g_inverse(Real s, Real tol = Real(1e-12)) {
  if (!(s >= 0) || !std::isfinite(s)) throw InvalidArgument("g_inverse: S must be finite and >= 0");
  if (s == 0) return 0;
  Real lo = 0, hi = 1;
  while (g_entropy(hi) < s) hi *= 2;
  Real n = std::clamp(std::exp(s - 1) - Real(0.5), lo + (hi - lo) * Real(1e-3), hi);
  for (int it = 0; it < 200; ++it) {
    const Real f = g_entropy(n) - s;
    if (f > 0) hi = n; else lo = n;
    Real next = n - f / g_derivative(n);
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    if (std::abs(next - n) <= Real(1e-3) * tol * std::max(Real(1), n)) return next;
    n = next;
  }
  return n;
}

/// J(omega_n) = 4 pi log(1 + 1/n); +infinity at n = 0.
template <typename Real>
Real thermal_fisher_closed(Real n) {
  if (!(n >= 0)) throw InvalidArgument("thermal_fisher_closed: n must be >= 0");
  if (n == 0) return std::numeric_limits<Real>::infinity();
  return 4 * Real(EIGEN_PI) * std::log1p(1 / n);
}

/// N(omega_n) = (n+1)^{n+1} / n^n.
template <typename Real>
Real thermal_entropy_power_closed(Real n) {
  return std::exp(g_entropy(n));
}

/// (d/dt [J(omega_{n+2 pi t})/2]^{-1}) at t = 0, i.e. 1/(n(n+1) log^2(1+1/n)).
template <typename Real>
Real fisher_isoperimetric_ratio(Real n) {
  const Real l = std::log1p(1 / n);
  return 1 / (n * (n + 1) * l * l);
}

/// J(omega_n) N(omega_n), which tends to 4 pi e.
template <typename Real>
Real entropy_isoperimetric_product(Real n) {
  return thermal_fisher_closed(n) * thermal_entropy_power_closed(n);
}

// ---------------------------------------------------------------------------
// Gaussian states

/// One-mode Gaussian state: M = kappa O diag(z^2, 1/z^2) O^T, with O the
/// rotation by `angle`. Covariance convention M_jk = tr(rho {R_j, R_k}) for
/// the centered quadratures, so the vacuum has M = I and kappa = 2 nbar + 1.
template <typename Real = double>
struct GaussianStateSpec {
  Vec2<Real> mean = Vec2<Real>::Zero();
  Real kappa = 1;
  Real z = 1;
  Real angle = 0;

  static GaussianStateSpec make(const Vec2<Real>& mean, Real kappa, Real z, Real angle = 0) {
    if (!(kappa >= 1 - Real(1e-12))) throw InvalidArgument("GaussianStateSpec: kappa must be >= 1");
    if (!(z >= 1 - Real(1e-12))) throw InvalidArgument("GaussianStateSpec: z must be >= 1");
    return {mean, std::max(kappa, Real(1)), std::max(z, Real(1)), angle};
  }

  static GaussianStateSpec thermal(Real nbar) { return make(Vec2<Real>::Zero(), 2 * nbar + 1, 1); }

  static GaussianStateSpec from_covariance(const Mat2<Real>& m, const Vec2<Real>& mean = Vec2<Real>::Zero()) {
    Eigen::SelfAdjointEigenSolver<Mat2<Real>> es(m);
    const Real small = es.eigenvalues()(0), large = es.eigenvalues()(1);
    if (!(small > 0)) throw InvalidArgument("GaussianStateSpec: covariance not positive definite");
    const Vec2<Real> v = es.eigenvectors().col(1);
    return make(mean, std::sqrt(small * large), std::pow(large / small, Real(0.25)), std::atan2(v(1), v(0)));
  }

  Mat2<Real> covariance() const {
    Mat2<Real> o;
    o << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Mat2<Real> d = Mat2<Real>::Zero();
    d(0, 0) = z * z;
    d(1, 1) = 1 / (z * z);
    return kappa * o * d * o.transpose();
  }

  Real mean_photon_centered() const { return (kappa - 1) / 2; }
};

template <typename Real = double>
struct JPair {
  Real j_minus = 0;
  Real j_plus = 0;
  /// kappa <= 1: the logarithm diverges (pure squeezed or vacuum state).
  bool divergent = false;
};

/// J_-/+ = (1/2 (z^2 + 1/z^2) -/+ kappa) log((kappa+1)/(kappa-1)).
template <typename Real>
JPair<Real> j_pm_gaussian(Real kappa, Real z) {
  if (!(z >= 1)) throw InvalidArgument("j_pm_gaussian: z must be >= 1");
  if (!(kappa > 1)) {
    const Real inf = std::numeric_limits<Real>::infinity();
    return {inf, inf, true};
  }
  const Real l = std::log((kappa + 1) / (kappa - 1));
  const Real s = (z * z + 1 / (z * z)) / 2;
  return {(s - kappa) * l, (s + kappa) * l, false};
}

/// Covariance flow of c_loss L_- + c_gain L_+:
/// dM/dt = -(c_loss - c_gain) M + (c_loss + c_gain) I, mean decaying at half the net loss rate.
template <typename Real>
GaussianStateSpec<Real> gaussian_evolve(const GaussianStateSpec<Real>& spec, const SemigroupKind<Real>& kind, Real t) {
  if (!(t >= 0)) throw InvalidArgument("gaussian_evolve: t must be >= 0");
  const Real rate = kind.loss_rate() - kind.gain_rate();
  const Real source = kind.loss_rate() + kind.gain_rate();
  const Real decay = std::exp(-rate * t);
  const Real added = rate == 0 ? source * t : source * (1 - decay) / rate;
  const Mat2<Real> m = decay * spec.covariance() + added * Mat2<Real>::Identity();
  return GaussianStateSpec<Real>::from_covariance(m, std::exp(-rate * t / 2) * spec.mean);
}

// ---------------------------------------------------------------------------
// qOU identities

/// D(rho || sigma_{mu,lambda}) = -S - n log nu - log(1 - nu).
template <typename Real>
Real relent_to_qou_fixed(Real s, Real n, Real mu, Real lambda) {
  const auto k = SemigroupKind<Real>::qou(mu, lambda);
  const Real nu = k.nu();
  return -s - n * std::log(nu) - std::log1p(-nu);
}

/// h(n) = mu^2 log(n+1) - lambda^2 log n + lambda^2 log lambda^2 - mu^2 log mu^2 + zeta log zeta.
/// For thermal states it equals -zeta D - dD/dt along the qOU flow.
template <typename Real>
Real h_function(Real n, Real mu, Real lambda) {
  if (!(n > 0)) throw InvalidArgument("h_function: n must be > 0");
  const auto k = SemigroupKind<Real>::qou(mu, lambda);
  const Real m2 = mu * mu, l2 = lambda * lambda, z = k.zeta();
  return m2 * std::log1p(n) - l2 * std::log(n) + l2 * std::log(l2) - m2 * std::log(m2) + z * std::log(z);
}

template <typename Real = double>
struct HMinimum {
  Real n_star = 0;
  Real value = 0;
};

/// Stationary point n* = lambda^2 / zeta of h and its value.
template <typename Real>
HMinimum<Real> h_minimize(Real mu, Real lambda) {
  const Real n = SemigroupKind<Real>::qou(mu, lambda).fixed_point_nbar();
  return {n, h_function(n, mu, lambda)};
}

/// h''(n*) = zeta (1/lambda^2 - 1/mu^2).
template <typename Real>
Real h_curvature_at_minimum(Real mu, Real lambda) {
  const auto k = SemigroupKind<Real>::qou(mu, lambda);
  return k.zeta() * (1 / (lambda * lambda) - 1 / (mu * mu));
}

/// -(zeta + eps) D(omega_n || sigma) - dD/dt for the thermal state omega_n.
template <typename Real>
Real strengthened_rate_expression(Real n, Real mu, Real lambda, Real eps) {
  return h_function(n, mu, lambda) - eps * relent_to_qou_fixed(g_entropy(n), n, mu, lambda);
}

/// Smallest n on a logarithmic grid over [1e-3, n_max] at which the rate
/// zeta + eps fails for a thermal state (expression below -1e-9), if any.
template <typename Real>
std::optional<Real> zeta_optimality_witness(Real mu, Real lambda, Real eps, Real n_max, int points_per_decade = 200) {
  if (!(eps >= 0)) throw InvalidArgument("zeta_optimality_witness: eps must be >= 0");
  if (!(n_max > Real(1e-3))) throw InvalidArgument("zeta_optimality_witness: n_max must exceed 1e-3");
  const Real lo = std::log10(Real(1e-3)), hi = std::log10(n_max);
  const int count = std::max(2, static_cast<int>(std::ceil((hi - lo) * points_per_decade)) + 1);
  for (int i = 0; i < count; ++i) {
    const Real n = std::pow(Real(10), lo + (hi - lo) * Real(i) / Real(count - 1));
    if (strengthened_rate_expression(n, mu, lambda, eps) < Real(-1e-9)) return n;
  }
  return std::nullopt;
}

/// Constants of the log-Sobolev bound
/// -zeta D - dD/dt >= alpha_- J_- + alpha_+ J_+ + gamma n + delta.
template <typename Real = double>
struct LogSobolevConstants {
  Real alpha_minus = 0;
  Real alpha_plus = 0;
  Real gamma = 0;
  Real delta = 0;
};

template <typename Real>
LogSobolevConstants<Real> log_sobolev_constants(Real mu, Real lambda, Real zeta, Real a) {
  if (!(a > 0) || !(zeta > 0)) throw InvalidArgument("log_sobolev_constants: A and zeta must be positive");
  const auto k = SemigroupKind<Real>::qou(mu, lambda);
  const Real nu = k.nu();
  const Real m2 = mu * mu, l2 = lambda * lambda, pi = Real(EIGEN_PI);
  return {m2 / 2 - 2 * pi * a * zeta, l2 / 2 - 2 * pi * a * zeta, std::log(nu) * (zeta - (m2 - l2)),
          zeta * (std::log1p(-nu) + 2 + std::log(4 * pi * a)) + l2 * std::log(nu)};
}

/// The choice A = lambda^2 / (4 pi (mu^2 - lambda^2)) that cancels the J_+ term.
template <typename Real>
Real log_sobolev_special_a(Real mu, Real lambda) {
  return lambda * lambda / (4 * Real(EIGEN_PI) * SemigroupKind<Real>::qou(mu, lambda).zeta());
}

/// Lower bound -zeta n log(1 + 1/n) + delta for zeta = mu^2 - lambda^2 and the special A.
template <typename Real>
Real log_sobolev_photon_bound(Real n, Real mu, Real lambda) {
  const Real zeta = SemigroupKind<Real>::qou(mu, lambda).zeta();
  const auto c = log_sobolev_constants(mu, lambda, zeta, log_sobolev_special_a(mu, lambda));
  const Real term = n > 0 ? -zeta * n * std::log1p(1 / n) : Real(0);
  return term + c.delta;
}

// ---------------------------------------------------------------------------
// Classical Ornstein-Uhlenbeck process dX = -theta X dt + sigma dB.

template <typename Real = double>
struct ClassicalOUParams {
  Real theta = 1;
  Real sigma2 = 1;

  static ClassicalOUParams make(Real theta, Real sigma2) {
    if (!(theta > 0) || !(sigma2 > 0)) throw InvalidArgument("ClassicalOUParams: theta and sigma^2 must be positive");
    return {theta, sigma2};
  }
  Real stationary_variance() const { return sigma2 / (2 * theta); }
};

template <typename Real = double>
struct CouState {
  Real variance = 0;
  /// D(X_t || Z) against the stationary Gaussian.
  Real relent = 0;
  Real relent_rate = 0;
  /// -2 theta D - dD/dt.
  Real rate_margin = 0;
};

/// Centered Gaussian initial law with variance var0, evolved for time t.
template <typename Real>
CouState<Real> cou_step(const ClassicalOUParams<Real>& p, Real var0, Real t) {
  if (!(var0 > 0)) throw InvalidArgument("cou_step: var0 must be positive");
  if (!(t >= 0)) throw InvalidArgument("cou_step: t must be >= 0");
  const Real vinf = p.stationary_variance();
  const Real decay = std::exp(-2 * p.theta * t);
  CouState<Real> s;
  s.variance = decay * var0 + vinf * (1 - decay);
  const Real x = s.variance / vinf;
  s.relent = (x - 1 - std::log(x)) / 2;
  s.relent_rate = -p.theta * (x - 1) * (x - 1) / x;
  // -2 theta D - dD/dt simplifies to theta (log x + 1/x - 1) >= 0.
  s.rate_margin = p.theta * (std::log(x) + 1 / x - 1);
  return s;
}

// ---------------------------------------------------------------------------
// Log-Sobolev-2 brackets for the qOU semigroup.

template <typename Real = double>
struct CarboneBounds {
  Real alpha_c_inv_lower = 0;
  Real alpha_c_inv_upper = 0;
  Real alpha2_inv_lower = 0;
  Real alpha2_inv_upper = 0;
  /// Intervals for the constants themselves.
  Real alpha2_lower = 0;
  Real alpha2_upper = 0;
  Real alpha_c_lower = 0;
  Real alpha_c_upper = 0;
};

template <typename Real>
CarboneBounds<Real> carbone_lsi2_bounds(Real mu, Real lambda) {
  const Real nu = SemigroupKind<Real>::qou(mu, lambda).nu();
  const Real m2 = mu * mu, one = 1 - nu, lognu_inv = -std::log(nu);
  CarboneBounds<Real> b;
  b.alpha_c_inv_lower = lognu_inv / (5 * std::sqrt(Real(5)) * m2 * std::pow(one, Real(1.5)));
  b.alpha_c_inv_upper = Real(255) / 4 * ((1 + std::log(Real(2))) * one + lognu_inv) / (m2 * one * one * one);
  b.alpha2_inv_lower = b.alpha_c_inv_lower;
  b.alpha2_inv_upper = 4 * (5 - std::log(one)) / (m2 * one) + 3 * std::log(Real(3)) * b.alpha_c_inv_upper;
  b.alpha2_lower = 1 / b.alpha2_inv_upper;
  b.alpha2_upper = 1 / b.alpha2_inv_lower;
  b.alpha_c_lower = 1 / b.alpha_c_inv_upper;
  b.alpha_c_upper = 1 / b.alpha_c_inv_lower;
  return b;
}

}  // namespace cqi
