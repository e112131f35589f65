#pragma once

// Heat, attenuator, amplifier and quantum Ornstein-Uhlenbeck semigroups on the
// truncated Fock space, the phase-space convolution f *_t rho, and
// finite-difference entropy and divergence rates.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cqi/errors.hpp"
#include "cqi/fock.hpp"
#include "cqi/quadrature.hpp"

namespace cqi {

/// Generator c_loss L_- + c_gain L_+. The heat generator is 2 pi (L_- + L_+),
/// which coincides with -pi sum_j [R_j,[R_j, .]] on the truncated space.
template <typename Real = double>
class SemigroupKind {
 public:
  enum class Tag { Heat, Attenuator, Amplifier, QOU };

  static SemigroupKind heat() { return {Tag::Heat, 0, 0}; }
  static SemigroupKind attenuator() { return {Tag::Attenuator, 0, 0}; }
  static SemigroupKind amplifier() { return {Tag::Amplifier, 0, 0}; }
  static SemigroupKind qou(Real mu, Real lambda) {
    if (!(lambda > 0) || !(mu > lambda) || !std::isfinite(mu))
      throw InvalidArgument("qOU semigroup requires mu > lambda > 0");
    return {Tag::QOU, mu, lambda};
  }

  Tag tag() const noexcept { return tag_; }
  Real mu() const noexcept { return mu_; }
  Real lambda() const noexcept { return lambda_; }

  Real loss_rate() const noexcept {
    switch (tag_) {
      case Tag::Heat: return Real(2 * EIGEN_PI);
      case Tag::Attenuator: return 1;
      case Tag::Amplifier: return 0;
      case Tag::QOU: return mu_ * mu_;
    }
    return 0;
  }
  Real gain_rate() const noexcept {
    switch (tag_) {
      case Tag::Heat: return Real(2 * EIGEN_PI);
      case Tag::Attenuator: return 0;
      case Tag::Amplifier: return 1;
      case Tag::QOU: return lambda_ * lambda_;
    }
    return 0;
  }

  /// nu = lambda^2 / mu^2 (qOU only).
  Real nu() const { return require_qou(), lambda_ * lambda_ / (mu_ * mu_); }
  /// zeta = mu^2 - lambda^2 (qOU only).
  Real zeta() const { return require_qou(), mu_ * mu_ - lambda_ * lambda_; }
  Real fixed_point_nbar() const { return require_qou(), lambda_ * lambda_ / zeta(); }

  std::string name() const {
    switch (tag_) {
      case Tag::Heat: return "heat";
      case Tag::Attenuator: return "attenuator";
      case Tag::Amplifier: return "amplifier";
      case Tag::QOU: return "qou";
    }
    return "";
  }

 private:
  SemigroupKind(Tag tag, Real mu, Real lambda) : tag_(tag), mu_(mu), lambda_(lambda) {}
  void require_qou() const {
    if (tag_ != Tag::QOU) throw InvalidArgument("parameter defined only for the qOU semigroup");
  }
  Tag tag_;
  Real mu_;
  Real lambda_;
};

enum class SolverMethod { RK4Fixed };

template <typename Real = double>
struct SolverOptions {
  Real step = Real(1e-3);
  SolverMethod method = SolverMethod::RK4Fixed;
  Real trace_tolerance = Real(1e-9);
  Real edge_tolerance = Real(kDefaultEdgeTolerance);
  /// Thermal inputs are mapped by the closed-form photon-number flow.
  bool closed_form_fast_path = true;
};

namespace detail {

/// out = c_loss L_-(x) + c_gain L_+(x), elementwise in O(dim^2). The truncated
/// products a^dagger a = diag(j) and a a^dagger = diag(j+1, ..., dim-1, 0) are
/// used, so the trace is preserved exactly.
template <typename Real>
void apply_generator(Real c_loss, Real c_gain, const CMatrix<Real>& x, CMatrix<Real>& out) {
  const Index n = x.rows();
  out.resize(n, n);
  std::vector<Real> root(n + 1), up(n);
  for (Index j = 0; j <= n; ++j) root[j] = std::sqrt(Real(j));
  for (Index j = 0; j < n; ++j) up[j] = j + 1 < n ? Real(j + 1) : Real(0);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      Complex<Real> v = -(c_loss * Real(j + k) + c_gain * (up[j] + up[k])) * Real(0.5) * x(j, k);
      if (c_loss != 0 && j + 1 < n && k + 1 < n) v += c_loss * root[j + 1] * root[k + 1] * x(j + 1, k + 1);
      if (c_gain != 0 && j > 0 && k > 0) v += c_gain * root[j] * root[k] * x(j - 1, k - 1);
      out(j, k) = v;
    }
  }
}

/// Gershgorin bound on the generator's spectral radius.
template <typename Real>
Real generator_norm_bound(Real c_loss, Real c_gain, Index dim) {
  return 2 * (c_loss * Real(dim - 1) + c_gain * Real(dim));
}

template <typename Real>
bool leaks_upward(const SemigroupKind<Real>& kind) {
  return kind.gain_rate() > 0;
}

}  // namespace detail

/// L(rho) as a Hermitian, traceless matrix.
template <typename Real>
CMatrix<Real> liouvillian_apply(const SemigroupKind<Real>& kind, const DensityMatrix<Real>& rho,
                                Real edge_tol = Real(kDefaultEdgeTolerance)) {
  require_dim(rho.dim(), 4);
  // L_- maps the truncated space into itself exactly; only gain terms see the edge.
  if (detail::leaks_upward(kind)) require_interior<Real>(rho.matrix(), edge_tol, "liouvillian_apply");
  CMatrix<Real> out;
  detail::apply_generator(kind.loss_rate(), kind.gain_rate(), rho.matrix(), out);
  return out;
}

/// Photon number of a thermal state after time t: dn/dt = -c_loss n + c_gain (n+1).
template <typename Real>
Real thermal_photon_map(const SemigroupKind<Real>& kind, Real n, Real t) {
  const Real gain = kind.gain_rate();
  const Real rate = kind.loss_rate() - gain;
  if (rate == 0) return n + gain * t;
  const Real decay = std::exp(-rate * t);
  return decay * n + (1 - decay) * gain / rate;
}

/// Mean photon number along the qOU flow.
template <typename Real>
Real photon_trajectory(Real n0, Real mu, Real lambda, Real t) {
  if (t < 0) throw InvalidArgument("photon_trajectory: t must be >= 0");
  return thermal_photon_map(SemigroupKind<Real>::qou(mu, lambda), n0, t);
}

/// Mean photon number if rho is the truncated geometric state, checked entrywise to tol.
template <typename Real>
std::optional<Real> detect_thermal(const DensityMatrix<Real>& rho, Real tol = Real(1e-12)) {
  if (rho.dim() < 2 || !rho.is_diagonal()) return std::nullopt;
  const RVector<Real> p = rho.populations();
  if (!(p(0) > 0)) return std::nullopt;
  const Real r = p(1) / p(0);
  if (!(r >= 0) || !(r < 1)) return std::nullopt;
  const Real nbar = r / (1 - r);
  RVector<Real> expected(p.size());
  Real w = 1;
  for (Index k = 0; k < p.size(); ++k) {
    expected(k) = w;
    w *= r;
  }
  expected /= expected.sum();
  if ((expected - p).cwiseAbs().maxCoeff() > tol) return std::nullopt;
  return nbar;
}

/// e^{tL} rho by fixed-step RK4. The step is capped for stability by the
/// generator norm; trace drift and edge mass are monitored on every step.
template <typename Real>
DensityMatrix<Real> evolve(const DensityMatrix<Real>& rho, const SemigroupKind<Real>& kind, Real t,
                           const SolverOptions<Real>& opts = {}) {
  if (!(t >= 0) || !std::isfinite(t)) throw InvalidArgument("evolve: t must be finite and >= 0");
  if (!(opts.step > 0)) throw InvalidArgument("evolve: step must be positive");
  if (t == 0) return rho;

  if (opts.closed_form_fast_path) {
    if (const auto n = detect_thermal(rho)) {
      return thermal_state<Real>(thermal_photon_map(kind, *n, t), rho.dim(), opts.edge_tolerance);
    }
  }

  const Index dim = rho.dim();
  require_dim(dim, 4);
  const Real cl = kind.loss_rate();
  const Real cg = kind.gain_rate();
  const bool monitor_edge = detail::leaks_upward(kind);
  const Real cap = Real(2.5) / detail::generator_norm_bound(cl, cg, dim);
  const long steps = static_cast<long>(std::ceil(t / std::min(opts.step, cap)));
  const Real dt = t / Real(steps);

  CMatrix<Real> x = rho.matrix();
  CMatrix<Real> k1, k2, k3, k4, tmp;
  auto check_edge = [&](const CMatrix<Real>& m) {
    if (monitor_edge) require_interior<Real>(m, opts.edge_tolerance, "evolve");
  };
  check_edge(x);
  for (long s = 0; s < steps; ++s) {
    detail::apply_generator(cl, cg, x, k1);
    tmp = x + (dt / 2) * k1;
    detail::apply_generator(cl, cg, tmp, k2);
    tmp = x + (dt / 2) * k2;
    detail::apply_generator(cl, cg, tmp, k3);
    tmp = x + dt * k3;
    detail::apply_generator(cl, cg, tmp, k4);
    x += (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    const Real drift = std::abs(x.trace().real() - Real(1));
    if (!(drift <= opts.trace_tolerance))
      throw StepSizeError("evolve: trace drift " + format_real(double(drift)) + " at step " +
                          std::to_string(s) + "; reduce the step below " + format_real(double(dt)));
    check_edge(x);
  }
  return DensityMatrix<Real>::from_hermitized(x);
}

// ---------------------------------------------------------------------------
// Phase-space densities and convolution

template <typename Real = double>
struct GaussianDensity {
  Vec2<Real> mean = Vec2<Real>::Zero();
  Mat2<Real> cov = Mat2<Real>::Identity();

  static GaussianDensity make(const Vec2<Real>& mean, const Mat2<Real>& cov) {
    if (!mean.allFinite() || !cov.allFinite()) throw InvalidArgument("GaussianDensity: non-finite parameters");
    if (std::abs(cov(0, 1) - cov(1, 0)) > Real(1e-12) * (1 + cov.cwiseAbs().maxCoeff()))
      throw InvalidArgument("GaussianDensity: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat2<Real>> es(cov);
    if (!(es.eigenvalues().minCoeff() > 0)) throw InvalidArgument("GaussianDensity: covariance not positive definite");
    return {mean, cov};
  }
  /// Centered, unit covariance: f_Z.
  static GaussianDensity standard() { return {}; }
};

template <typename Real = double>
struct AtomMixture {
  std::vector<Vec2<Real>> points;
  std::vector<Real> weights;

  static AtomMixture make(std::vector<Vec2<Real>> points, std::vector<Real> weights) {
    if (points.size() != weights.size() || points.empty())
      throw InvalidArgument("AtomMixture: need equally many points and weights");
    Real total = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0) || !points[i].allFinite()) throw InvalidArgument("AtomMixture: invalid atom");
      total += weights[i];
    }
    if (std::abs(total - 1) > Real(1e-12)) throw InvalidArgument("AtomMixture: weights must sum to 1");
    return {std::move(points), std::move(weights)};
  }
};

template <typename Real = double>
using PhaseDensity = std::variant<GaussianDensity<Real>, AtomMixture<Real>>;

/// Density of X + sqrt(s) Z for the Gaussian X.
template <typename Real>
GaussianDensity<Real> heat_evolved(const GaussianDensity<Real>& f, Real s) {
  return GaussianDensity<Real>::make(f.mean, f.cov + s * Mat2<Real>::Identity());
}

template <typename Real>
PhaseDensity<Real> shifted(const PhaseDensity<Real>& f, const Vec2<Real>& v) {
  if (const auto* g = std::get_if<GaussianDensity<Real>>(&f)) return GaussianDensity<Real>::make(g->mean + v, g->cov);
  auto m = std::get<AtomMixture<Real>>(f);
  for (auto& p : m.points) p += v;
  return m;
}

inline constexpr int kDefaultQuadOrder = 20;
inline constexpr double kQuadratureTolerance = 1e-8;
/// Largest entrywise change allowed when the rule is refined by half its order.
inline constexpr double kQuadratureConvergenceTolerance = 1e-5;

namespace detail {

template <typename Real>
CMatrix<Real> average_along_axis(const CMatrix<Real>& x, const Vec2<Real>& axis_dir, Real scale, int order) {
  const DisplacementAxis<Real> axis(axis_dir, x.rows());
  const CMatrix<Real> xa = axis.to_axis_basis(x);
  auto kernel = [&](int n) {
    const auto rule = standard_normal_rule<Real>(n);
    std::vector<Real> shifts(rule.nodes.size());
    for (std::size_t i = 0; i < shifts.size(); ++i) shifts[i] = scale * rule.nodes[i];
    return axis.averaging_kernel(shifts, rule.weights);
  };
  const CMatrix<Real> k = kernel(order);
  const CMatrix<Real> k_ref = kernel(order + std::max(4, order / 2));
  const Real err = (k - k_ref).cwiseProduct(xa).cwiseAbs().maxCoeff();
  if (!(err < Real(kQuadratureConvergenceTolerance)))
    throw QuadratureError("convolve: Gauss-Hermite order " + std::to_string(order) +
                          " not converged (discrepancy " + format_real(double(err)) +
                          "); raise the order or reduce t");
  return axis.from_axis_basis(xa.cwiseProduct(k));
}

template <typename Real>
DensityMatrix<Real> finish_convolution(CMatrix<Real> x) {
  const Real tr = x.trace().real();
  if (!(std::abs(tr - 1) < Real(kQuadratureTolerance)))
    throw QuadratureError("convolve: trace deviation " + format_real(double(tr - 1)) +
                          "; raise the order or the dimension");
  x /= tr;
  return DensityMatrix<Real>::from_hermitized(x);
}

}  // namespace detail

/// f *_t rho = int f(xi) W(sqrt(t) xi) rho W(sqrt(t) xi)^dagger dxi.
/// Gaussian f is integrated along its principal axes, each with a
/// Gauss-Hermite rule applied as a phase kernel in the axis eigenbasis;
/// atom mixtures are summed exactly.
template <typename Real>
DensityMatrix<Real> convolve(const PhaseDensity<Real>& f, const DensityMatrix<Real>& rho, Real t,
                             int quad_order = kDefaultQuadOrder) {
  if (!(t >= 0) || !std::isfinite(t)) throw InvalidArgument("convolve: t must be finite and >= 0");
  if (t == 0) return rho;
  const Real rt = std::sqrt(t);
  if (const auto* mix = std::get_if<AtomMixture<Real>>(&f)) {
    CMatrix<Real> acc = CMatrix<Real>::Zero(rho.dim(), rho.dim());
    for (std::size_t i = 0; i < mix->points.size(); ++i) {
      if (mix->weights[i] == 0) continue;
      const auto w = weyl_operator<Real>(rt * mix->points[i], rho.dim());
      acc.noalias() += mix->weights[i] * (w.matrix * rho.matrix() * w.matrix.adjoint());
    }
    return detail::finish_convolution<Real>(std::move(acc));
  }
  if (quad_order < 8) throw InvalidArgument("convolve: quadrature order must be >= 8");
  const auto& g = std::get<GaussianDensity<Real>>(f);
  Eigen::SelfAdjointEigenSolver<Mat2<Real>> es(g.cov);
  CMatrix<Real> x = rho.matrix();
  for (int j = 0; j < 2; ++j) {
    const Real s = std::sqrt(std::max(es.eigenvalues()(j), Real(0)));
    x = detail::average_along_axis<Real>(x, es.eigenvectors().col(j), rt * s, quad_order);
  }
  if (!g.mean.isZero(0)) {
    const auto w = weyl_operator<Real>(rt * g.mean, rho.dim());
    x = w.matrix * x * w.matrix.adjoint();
  }
  return detail::finish_convolution<Real>(std::move(x));
}

// ---------------------------------------------------------------------------
// Rates

template <typename Real = double>
struct RateEstimate {
  Real value = 0;
  Real error_estimate = 0;
  Real stencil_h = 0;
};

inline constexpr double kDefaultRateStep = 1e-4;
inline constexpr double kRateRankThreshold = 1e-12;

namespace detail {

template <typename Real>
void check_rate_step(Real h) {
  if (!(h >= Real(1e-5) && h <= Real(1e-2))) throw InvalidArgument("rate stencil h must lie in [1e-5, 1e-2]");
}

/// Forward difference of phi(e^{sL} rho) with one Richardson step over (h, h/2).
template <typename Real, typename Phi>
RateEstimate<Real> forward_richardson(const DensityMatrix<Real>& rho, const SemigroupKind<Real>& kind, Real h,
                                      Real phi0, Phi&& phi, SolverOptions<Real> opts) {
  opts.closed_form_fast_path = false;
  const Real d_h = (phi(evolve(rho, kind, h, opts)) - phi0) / h;
  const Real d_h2 = (phi(evolve(rho, kind, h / 2, opts)) - phi0) / (h / 2);
  return {2 * d_h2 - d_h, std::abs(d_h2 - d_h), h};
}

}  // namespace detail

/// 2 dS/dt at t = 0 along e^{tL}.
template <typename Real>
RateEstimate<Real> entropy_rate(const DensityMatrix<Real>& rho, const SemigroupKind<Real>& kind,
                                Real h = Real(kDefaultRateStep), const SolverOptions<Real>& opts = {}) {
  detail::check_rate_step(h);
  const auto s = spectrum(rho);
  if (!is_full_rank(s, Real(kRateRankThreshold)))
    throw IllConditioned("entropy_rate: state not full rank (min eigenvalue " + format_real(double(s.min())) +
                         "); the entropy derivative may diverge");
  auto r = detail::forward_richardson<Real>(
      rho, kind, h, entropy_of_values(s.values), [](const DensityMatrix<Real>& x) { return von_neumann_entropy(x); },
      opts);
  r.value *= 2;
  r.error_estimate *= 2;
  return r;
}

/// -tr(L(rho) log rho): the exact entropy derivative, useful as a reference.
template <typename Real>
Real entropy_derivative_exact(const DensityMatrix<Real>& rho, const SemigroupKind<Real>& kind) {
  CMatrix<Real> l;
  detail::apply_generator(kind.loss_rate(), kind.gain_rate(), rho.matrix(), l);
  return -(l * state_log(rho, Real(kRateRankThreshold))).trace().real();
}

template <typename Real = double>
struct DecayRateCheck {
  /// Finite-difference d/dt D(e^{tL} rho || sigma) at t = 0.
  RateEstimate<Real> rate;
  /// mu^2/2 J_- + lambda^2/2 J_+ + zeta S + lambda^2 log nu + zeta log(1 - nu),
  /// which equals -zeta D - dD/dt.
  Real rhs = 0;
  /// -zeta D - rhs: the derivative predicted from the identity.
  Real rate_from_identity = 0;
  Real divergence = 0;
};

/// Fixed point of the qOU semigroup as a truncated thermal state.
template <typename Real>
DensityMatrix<Real> qou_fixed_point(Real mu, Real lambda, Index dim) {
  return thermal_state<Real>(SemigroupKind<Real>::qou(mu, lambda).fixed_point_nbar(), dim);
}

template <typename Real>
DecayRateCheck<Real> relent_decay_rate(const DensityMatrix<Real>& rho, Real mu, Real lambda,
                                       Real h = Real(kDefaultRateStep), const SolverOptions<Real>& opts = {}) {
  detail::check_rate_step(h);
  const auto kind = SemigroupKind<Real>::qou(mu, lambda);
  const auto sigma = qou_fixed_point(mu, lambda, rho.dim());
  DecayRateCheck<Real> out;
  out.divergence = relative_entropy(rho, sigma);
  out.rate = detail::forward_richardson<Real>(
      rho, kind, h, out.divergence, [&](const DensityMatrix<Real>& x) { return relative_entropy(x, sigma); }, opts);

  const Real jm = entropy_rate(rho, SemigroupKind<Real>::attenuator(), h, opts).value;
  const Real jp = entropy_rate(rho, SemigroupKind<Real>::amplifier(), h, opts).value;
  const Real nu = kind.nu();
  const Real zeta = kind.zeta();
  out.rhs = mu * mu / 2 * jm + lambda * lambda / 2 * jp + zeta * von_neumann_entropy(rho) +
            lambda * lambda * std::log(nu) + zeta * std::log1p(-nu);
  out.rate_from_identity = -zeta * out.divergence - out.rhs;
  return out;
}

}  // namespace cqi
