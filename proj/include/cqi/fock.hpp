#pragma once

// Truncated single-mode Fock-space numerics.
//
// Everything here works on the span of |0>,...,|dim-1>. Operators are dense
// complex matrices; states are validated density matrices. All functions are
// templated on the real scalar type and are pure.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cqi/errors.hpp"

namespace cqi {

template <typename Real>
using Complex = std::complex<Real>;
template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using Vec2 = Eigen::Matrix<Real, 2, 1>;
template <typename Real>
using Mat2 = Eigen::Matrix<Real, 2, 2>;

using Index = Eigen::Index;

/// Numerical thresholds for the density-matrix invariants.
template <typename Real>
struct StateTolerance {
  static constexpr Real hermitian = Real(1e-12);
  static constexpr Real trace = Real(1e-10);
  static constexpr Real psd = Real(1e-10);
  // Smallest eigenvalue a non-diagonal reference state may have before its
  // logarithm is considered unreliable.
  static constexpr Real rank = Real(1e-14);
};

inline constexpr double kDefaultEdgeTolerance = 1e-6;

namespace detail {

template <typename Real>
Real max_hermitian_defect(const CMatrix<Real>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

template <typename Real>
bool exactly_diagonal(const CMatrix<Real>& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (i != j && m(i, j) != Complex<Real>(0)) return false;
  return true;
}

inline Index edge_band(Index dim) { return (dim + 7) / 8; }

}  // namespace detail

/// Hermitian, positive semidefinite, unit-trace matrix on a truncated Fock
/// basis. Construction always validates; the value is immutable afterwards.
template <typename Real = double>
class DensityMatrix {
 public:
  using Matrix = CMatrix<Real>;

  static DensityMatrix from_matrix(Matrix m) {
    validate(m);
    return DensityMatrix(std::move(m));
  }

  /// Symmetrizes (m + m^dagger)/2 before validating; used by integrators.
  static DensityMatrix from_hermitized(const Matrix& m) {
    Matrix h = (m + m.adjoint()) * Real(0.5);
    validate(h);
    return DensityMatrix(std::move(h));
  }

  static DensityMatrix diagonal(const RVector<Real>& probs) {
    Matrix m = Matrix::Zero(probs.size(), probs.size());
    for (Index k = 0; k < probs.size(); ++k) m(k, k) = probs(k);
    return from_matrix(std::move(m));
  }

  Index dim() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  Complex<Real> operator()(Index i, Index j) const { return m_(i, j); }

  /// Number-basis populations <k|rho|k>.
  RVector<Real> populations() const { return m_.diagonal().real(); }

  bool is_diagonal() const { return detail::exactly_diagonal<Real>(m_); }

  static void validate(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
      throw InvalidDimension("density matrix must be square and non-empty");
    if (!m.allFinite()) throw InvariantViolation("density matrix has non-finite entries");
    const Real herm = detail::max_hermitian_defect<Real>(m);
    if (herm > StateTolerance<Real>::hermitian)
      throw InvariantViolation("density matrix not Hermitian (defect " + format_real(double(herm)) + ")");
    const Real tr = m.trace().real();
    if (std::abs(tr - Real(1)) > StateTolerance<Real>::trace)
      throw InvariantViolation("density matrix trace " + format_real(double(tr)) + " != 1");
    Real min_eig;
    if (detail::exactly_diagonal<Real>(m)) {
      min_eig = m.diagonal().real().minCoeff();
    } else {
      Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
      min_eig = es.eigenvalues().minCoeff();
    }
    if (min_eig < -StateTolerance<Real>::psd)
      throw InvariantViolation("density matrix not positive semidefinite (min eigenvalue " +
                               format_real(double(min_eig)) + ")");
  }

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

/// Dense operator on the truncated Fock space.
template <typename Real = double>
struct FockOperator {
  CMatrix<Real> matrix;
  Index dim() const noexcept { return matrix.rows(); }
};

enum class MajorizationMode { WeakSub, Full, Fock };

enum class RandomFamily { FullRank, Diagonal, PureMixedEps };

// ---------------------------------------------------------------------------
// Operators

template <typename Real = double>
struct LadderOperators {
  FockOperator<Real> annihilate;
  FockOperator<Real> create;
  FockOperator<Real> number;
};

inline void require_dim(Index dim, Index minimum = 2) {
  if (dim < minimum)
    throw InvalidDimension("Fock dimension " + std::to_string(dim) + " below minimum " +
                           std::to_string(minimum));
}

template <typename Real = double>
LadderOperators<Real> ladder_operators(Index dim) {
  require_dim(dim);
  CMatrix<Real> a = CMatrix<Real>::Zero(dim, dim);
  for (Index n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(Real(n));
  CMatrix<Real> ad = a.adjoint();
  CMatrix<Real> num = ad * a;
  return {{std::move(a)}, {std::move(ad)}, {std::move(num)}};
}

/// Position and momentum quadratures with [Q,P] = i away from the edge.
template <typename Real = double>
std::pair<FockOperator<Real>, FockOperator<Real>> quadratures(Index dim) {
  const auto ops = ladder_operators<Real>(dim);
  const Real s = Real(1) / std::sqrt(Real(2));
  const Complex<Real> minus_i(0, -1);
  CMatrix<Real> q = (ops.annihilate.matrix + ops.create.matrix) * s;
  CMatrix<Real> p = (ops.annihilate.matrix - ops.create.matrix) * (minus_i * s);
  return {{std::move(q)}, {std::move(p)}};
}

/// Generator sqrt(2 pi) (xi_1 P - xi_2 Q) of the Weyl operator W(xi).
template <typename Real = double>
CMatrix<Real> weyl_generator(const Vec2<Real>& xi, Index dim) {
  const auto [q, p] = quadratures<Real>(dim);
  const Real c = std::sqrt(Real(2) * Real(EIGEN_PI));
  return c * (xi(0) * p.matrix - xi(1) * q.matrix);
}

/// W(xi) = exp(i sqrt(2 pi) xi . (sigma R)), from the eigendecomposition of
/// its Hermitian generator. Exactly unitary on the truncated space.
template <typename Real = double>
FockOperator<Real> weyl_operator(const Vec2<Real>& xi, Index dim) {
  require_dim(dim);
  if (!xi.allFinite()) throw InvalidArgument("weyl_operator: non-finite displacement");
  if (xi.isZero(0)) return {CMatrix<Real>::Identity(dim, dim)};
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(weyl_generator<Real>(xi, dim));
  const auto& v = es.eigenvectors();
  Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1> phases(dim);
  for (Index k = 0; k < dim; ++k) phases(k) = std::polar(Real(1), es.eigenvalues()(k));
  return {v * phases.asDiagonal() * v.adjoint()};
}

/// Displacements along a fixed phase-space direction u share one eigenbasis:
/// W(s u) = V diag(exp(i s g)) V^dagger. Conjugations and their averages are
/// then elementwise phase multiplications in that basis.
template <typename Real = double>
class DisplacementAxis {
 public:
  DisplacementAxis(const Vec2<Real>& direction, Index dim) {
    require_dim(dim);
    const Real norm = direction.norm();
    if (!(norm > 0) || !std::isfinite(norm))
      throw InvalidArgument("DisplacementAxis: direction must be finite and non-zero");
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(weyl_generator<Real>(direction / norm, dim));
    basis_ = es.eigenvectors();
    spectrum_ = es.eigenvalues();
  }

  Index dim() const noexcept { return basis_.rows(); }
  const CMatrix<Real>& basis() const noexcept { return basis_; }
  const RVector<Real>& spectrum() const noexcept { return spectrum_; }

  CMatrix<Real> to_axis_basis(const CMatrix<Real>& x) const { return basis_.adjoint() * x * basis_; }
  CMatrix<Real> from_axis_basis(const CMatrix<Real>& x) const { return basis_ * x * basis_.adjoint(); }

  /// Elementwise kernel sum_j w_j exp(i s_j (g_k - g_l)).
  CMatrix<Real> averaging_kernel(const std::vector<Real>& shifts, const std::vector<Real>& weights) const {
    const Index n = dim();
    CMatrix<Real> k = CMatrix<Real>::Zero(n, n);
    for (std::size_t j = 0; j < shifts.size(); ++j) {
      Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1> e(n);
      for (Index i = 0; i < n; ++i) e(i) = std::polar(Real(1), shifts[j] * spectrum_(i));
      k.noalias() += weights[j] * (e * e.adjoint());
    }
    return k;
  }

  /// W(s u) x W(s u)^dagger for x given in the axis basis; result in the axis basis.
  CMatrix<Real> conjugate_in_axis_basis(const CMatrix<Real>& x_axis, Real s) const {
    return x_axis.cwiseProduct(averaging_kernel({s}, {Real(1)}));
  }

  CMatrix<Real> conjugate(const CMatrix<Real>& x, Real s) const {
    return from_axis_basis(conjugate_in_axis_basis(to_axis_basis(x), s));
  }

 private:
  CMatrix<Real> basis_;
  RVector<Real> spectrum_;
};

// ---------------------------------------------------------------------------
// States

template <typename Real = double>
DensityMatrix<Real> number_state(Index n, Index dim) {
  require_dim(dim, 1);
  if (n < 0 || n >= dim)
    throw OutOfRange("number_state: level " + std::to_string(n) + " outside dim " + std::to_string(dim));
  RVector<Real> p = RVector<Real>::Zero(dim);
  p(n) = 1;
  return DensityMatrix<Real>::diagonal(p);
}

/// Probability mass of the geometric distribution with mean nbar above level dim-1.
template <typename Real>
Real thermal_tail_mass(Real nbar, Index dim) {
  if (nbar <= 0) return Real(0);
  return std::pow(nbar / (nbar + 1), Real(dim));
}

/// Smallest dimension whose discarded thermal tail is below tol.
template <typename Real>
Index thermal_min_dim(Real nbar, Real tol) {
  if (nbar <= 0) return 1;
  const Real r = nbar / (nbar + 1);
  return static_cast<Index>(std::ceil(std::log(tol) / std::log(r)));
}

inline constexpr double kThermalLeakageTolerance = 1e-12;

/// Gaussian thermal state (1/(n+1)) (n/(n+1))^j, renormalized on the truncated
/// space. The discarded mass is thermal_tail_mass(nbar, dim).
template <typename Real = double>
DensityMatrix<Real> thermal_state(Real nbar, Index dim, Real leakage_tol = Real(kThermalLeakageTolerance)) {
  require_dim(dim, 1);
  if (!(nbar >= 0) || !std::isfinite(nbar)) throw InvalidArgument("thermal_state: nbar must be finite and >= 0");
  const Real tail = thermal_tail_mass(nbar, dim);
  if (tail > leakage_tol) {
    const Index need = thermal_min_dim(nbar, leakage_tol);
    throw TruncationError("thermal_state: tail mass " + format_real(double(tail)) + " at dim " +
                              std::to_string(dim) + "; need dim >= " + std::to_string(need),
                          need);
  }
  RVector<Real> p(dim);
  const Real r = nbar / (nbar + 1);
  Real w = Real(1) / (nbar + 1);
  for (Index k = 0; k < dim; ++k) {
    p(k) = w;
    w *= r;
  }
  p /= p.sum();
  return DensityMatrix<Real>::diagonal(p);
}

/// Extra knobs for random_state. The geometric envelope keeps the sampled
/// states inside the truncation window; the thermal floor makes them full rank.
template <typename Real = double>
struct RandomStateOptions {
  Real envelope_nbar_min = Real(0.25);
  Real envelope_nbar_max = Real(1.5);
  Real floor_weight = Real(1e-6);
};

namespace detail {

/// Floor reference whose top level carries 1e-4 of the ground-level weight.
template <typename Real>
RVector<Real> floor_profile(Index dim) {
  RVector<Real> p(dim);
  if (dim == 1) {
    p(0) = 1;
    return p;
  }
  const Real r = std::pow(Real(1e-4), Real(1) / Real(dim - 1));
  Real w = 1;
  for (Index k = 0; k < dim; ++k) {
    p(k) = w;
    w *= r;
  }
  return p / p.sum();
}

}  // namespace detail

/// Deterministic random state for (dim, seed, family).
template <typename Real = double>
DensityMatrix<Real> random_state(Index dim, std::uint64_t seed, RandomFamily family,
                                 const RandomStateOptions<Real>& opts = {}) {
  require_dim(dim);
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(family) + 1);
  std::uniform_real_distribution<Real> uni(opts.envelope_nbar_min, opts.envelope_nbar_max);
  std::normal_distribution<Real> gauss(0, 1);

  const Real env_nbar = uni(rng);
  const Real r = env_nbar / (env_nbar + 1);
  RVector<Real> env(dim);
  Real w = 1;
  for (Index k = 0; k < dim; ++k) {
    env(k) = w;
    w *= r;
  }

  CMatrix<Real> m;
  switch (family) {
    case RandomFamily::FullRank: {
      CMatrix<Real> g(dim, dim);
      const Real s = Real(1) / std::sqrt(Real(2));
      for (Index j = 0; j < dim; ++j)
        for (Index i = 0; i < dim; ++i) g(i, j) = Complex<Real>(gauss(rng), gauss(rng)) * s * std::sqrt(env(i));
      m = g * g.adjoint();
      break;
    }
    case RandomFamily::Diagonal: {
      // Shifted exponential weights: populations are non-monotone but never
      // far below the envelope, so the death flow is not stiff at t = 0.
      std::exponential_distribution<Real> expo(1);
      m = CMatrix<Real>::Zero(dim, dim);
      for (Index k = 0; k < dim; ++k) m(k, k) = (expo(rng) + Real(0.25)) * env(k);
      break;
    }
    case RandomFamily::PureMixedEps: {
      Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1> psi(dim);
      for (Index k = 0; k < dim; ++k) psi(k) = Complex<Real>(gauss(rng), gauss(rng)) * std::sqrt(env(k));
      m = psi * psi.adjoint();
      break;
    }
  }
  m /= m.trace().real();
  m = (m + m.adjoint()) * Real(0.5);
  m *= (1 - opts.floor_weight);
  const RVector<Real> floor = detail::floor_profile<Real>(dim);
  for (Index k = 0; k < dim; ++k) m(k, k) += opts.floor_weight * floor(k);
  m /= m.trace().real();
  return DensityMatrix<Real>::from_matrix(std::move(m));
}

// ---------------------------------------------------------------------------
// Spectral quantities

/// Eigen-decomposition of a state with roundoff clamping: eigenvalues in
/// [-psd, 0) become 0. Diagonal inputs are read off exactly.
template <typename Real = double>
struct Spectrum {
  RVector<Real> values;
  CMatrix<Real> vectors;
  bool exact = false;

  Real min() const { return values.minCoeff(); }
};

template <typename Real = double>
Spectrum<Real> spectrum(const DensityMatrix<Real>& rho) {
  Spectrum<Real> s;
  const Index n = rho.dim();
  if (rho.is_diagonal()) {
    s.values = rho.populations();
    s.vectors = CMatrix<Real>::Identity(n, n);
    s.exact = true;
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(rho.matrix());
    s.values = es.eigenvalues();
    s.vectors = es.eigenvectors();
  }
  for (Index k = 0; k < n; ++k) {
    if (s.values(k) < -StateTolerance<Real>::psd)
      throw InvariantViolation("negative eigenvalue " + format_real(double(s.values(k))));
    if (s.values(k) < 0) s.values(k) = 0;
  }
  return s;
}

/// Full rank in the sense needed for logarithms: strictly positive spectrum
/// when it is exact, above StateTolerance::rank otherwise.
template <typename Real>
bool is_full_rank(const Spectrum<Real>& s, Real threshold = StateTolerance<Real>::rank) {
  return s.exact ? s.min() > 0 : s.min() > threshold;
}

template <typename Real>
Real entropy_of_values(const RVector<Real>& values) {
  Real s = 0;
  for (Index k = 0; k < values.size(); ++k)
    if (values(k) > 0) s -= values(k) * std::log(values(k));
  return s;
}

/// Von Neumann entropy in nats.
template <typename Real>
Real von_neumann_entropy(const DensityMatrix<Real>& rho) {
  return entropy_of_values(spectrum(rho).values);
}

/// log(rho) for a full-rank state.
template <typename Real>
CMatrix<Real> state_log(const DensityMatrix<Real>& rho, Real rank_threshold = StateTolerance<Real>::rank) {
  const auto s = spectrum(rho);
  if (!is_full_rank(s, rank_threshold))
    throw IllConditioned("state_log: state is not full rank (min eigenvalue " + format_real(double(s.min())) + ")");
  RVector<Real> logs = s.values.array().log();
  return s.vectors * logs.template cast<Complex<Real>>().asDiagonal() * s.vectors.adjoint();
}

/// D(rho||sigma) = tr(rho log rho) - tr(rho log sigma). Returns +infinity when
/// rho has weight on a null direction of sigma.
template <typename Real>
Real relative_entropy(const DensityMatrix<Real>& rho, const DensityMatrix<Real>& sigma) {
  if (rho.dim() != sigma.dim())
    throw InvalidDimension("relative_entropy: dimension mismatch " + std::to_string(rho.dim()) + " vs " +
                           std::to_string(sigma.dim()));
  const auto ss = spectrum(sigma);
  // <v_k|rho|v_k> for the eigenvectors of sigma.
  RVector<Real> weights;
  if (ss.exact) {
    weights = rho.populations();
  } else {
    weights = (ss.vectors.adjoint() * rho.matrix() * ss.vectors).diagonal().real();
  }
  const Real threshold = ss.exact ? Real(0) : StateTolerance<Real>::rank;
  Real cross = 0;
  bool rank_deficient = false;
  for (Index k = 0; k < weights.size(); ++k) {
    if (ss.values(k) <= threshold) {
      rank_deficient = true;
      if (weights(k) > Real(1e-12)) return std::numeric_limits<Real>::infinity();
      continue;
    }
    cross += weights(k) * std::log(ss.values(k));
  }
  if (rank_deficient)
    throw IllConditioned("relative_entropy: reference state is rank deficient (min eigenvalue " +
                         format_real(double(ss.min())) + ")");
  return -von_neumann_entropy(rho) - cross;
}

/// N(rho) = exp(S(rho)) for one mode.
template <typename Real>
Real entropy_power(const DensityMatrix<Real>& rho) {
  return std::exp(von_neumann_entropy(rho));
}

template <typename Real>
Real mean_photon(const DensityMatrix<Real>& rho) {
  const RVector<Real> p = rho.populations();
  Real n = 0;
  for (Index k = 0; k < p.size(); ++k) n += Real(k) * p(k);
  return n;
}

/// Passive rearrangement: decreasing spectrum placed on |0>, |1>, ...
template <typename Real>
DensityMatrix<Real> fock_rearrangement(const DensityMatrix<Real>& rho) {
  RVector<Real> v = spectrum(rho).values;
  std::sort(v.data(), v.data() + v.size(), std::greater<Real>());
  v /= v.sum();
  return DensityMatrix<Real>::diagonal(v);
}

// ---------------------------------------------------------------------------
// Majorization

template <typename Real = double>
struct MajorizationResult {
  bool holds = false;
  /// Partial-sum slack (dominant minus dominated) for n = 0..len-1.
  RVector<Real> margins;
  Real trace_gap = 0;

  Real min_margin() const { return margins.size() ? margins.minCoeff() : Real(0); }
};

inline constexpr double kMajorizationTolerance = 1e-10;

/// Whether `dominant` majorizes `dominated` (dominated < dominant) in the
/// WeakSub or Full sense. Inputs are sorted decreasingly internally.
template <typename Real>
MajorizationResult<Real> majorizes(RVector<Real> dominant, RVector<Real> dominated, MajorizationMode mode) {
  if (dominant.size() != dominated.size())
    throw InvalidDimension("majorizes: length mismatch");
  if (mode == MajorizationMode::Fock)
    throw InvalidArgument("majorizes: Fock mode needs density matrices");
  std::sort(dominant.data(), dominant.data() + dominant.size(), std::greater<Real>());
  std::sort(dominated.data(), dominated.data() + dominated.size(), std::greater<Real>());
  MajorizationResult<Real> r;
  r.margins.resize(dominant.size());
  Real a = 0, b = 0;
  for (Index k = 0; k < dominant.size(); ++k) {
    a += dominant(k);
    b += dominated(k);
    r.margins(k) = a - b;
  }
  r.trace_gap = a - b;
  const Real tol = Real(kMajorizationTolerance);
  r.holds = r.min_margin() >= -tol;
  if (mode == MajorizationMode::Full) r.holds = r.holds && std::abs(r.trace_gap) <= tol;
  return r;
}

/// Majorization between states: spectra for WeakSub/Full, cumulative
/// number-basis populations tr(Pi_n rho) for Fock.
template <typename Real>
MajorizationResult<Real> majorizes(const DensityMatrix<Real>& dominant, const DensityMatrix<Real>& dominated,
                                   MajorizationMode mode) {
  if (dominant.dim() != dominated.dim()) throw InvalidDimension("majorizes: dimension mismatch");
  if (mode != MajorizationMode::Fock)
    return majorizes<Real>(spectrum(dominant).values, spectrum(dominated).values, mode);
  const RVector<Real> p = dominant.populations();
  const RVector<Real> q = dominated.populations();
  MajorizationResult<Real> r;
  r.margins.resize(p.size());
  Real a = 0, b = 0;
  for (Index k = 0; k < p.size(); ++k) {
    a += p(k);
    b += q(k);
    r.margins(k) = a - b;
  }
  r.trace_gap = a - b;
  r.holds = r.min_margin() >= -Real(kMajorizationTolerance);
  return r;
}

// ---------------------------------------------------------------------------
// Truncation diagnostics

template <typename Real = double>
struct HealthMetrics {
  /// States: population of the top ceil(dim/8) levels. Operators: the largest
  /// such population over images of the lower-half basis vectors.
  Real edge_mass = 0;
  Real trace_drift = 0;
  Real unitarity_defect = 0;
  bool flagged = false;
};

template <typename Real>
Real edge_mass(const CMatrix<Real>& rho) {
  const Index dim = rho.rows();
  const Index band = detail::edge_band(dim);
  Real m = 0;
  for (Index k = dim - band; k < dim; ++k) m += std::abs(rho(k, k).real());
  return m;
}

template <typename Real>
HealthMetrics<Real> truncation_health(const DensityMatrix<Real>& rho, Real edge_tol = Real(kDefaultEdgeTolerance)) {
  HealthMetrics<Real> h;
  h.edge_mass = edge_mass<Real>(rho.matrix());
  h.trace_drift = std::abs(rho.matrix().trace().real() - Real(1));
  h.flagged = h.edge_mass > edge_tol || h.trace_drift > StateTolerance<Real>::trace;
  return h;
}

template <typename Real>
HealthMetrics<Real> truncation_health(const FockOperator<Real>& op, Real edge_tol = Real(kDefaultEdgeTolerance)) {
  HealthMetrics<Real> h;
  const Index dim = op.dim();
  const Index band = detail::edge_band(dim);
  for (Index col = 0; col < dim / 2; ++col)
    h.edge_mass = std::max(h.edge_mass, op.matrix.col(col).tail(band).squaredNorm());
  h.unitarity_defect = (op.matrix.adjoint() * op.matrix - CMatrix<Real>::Identity(dim, dim)).cwiseAbs().maxCoeff();
  h.flagged = h.edge_mass > edge_tol || h.unitarity_defect > Real(1e-8);
  return h;
}

/// Throws TruncationError when the state's edge mass exceeds edge_tol.
template <typename Real>
void require_interior(const CMatrix<Real>& rho, Real edge_tol, const char* where) {
  const Real e = edge_mass<Real>(rho);
  if (!(e <= edge_tol))
    throw TruncationError(std::string(where) + ": edge mass " + format_real(double(e)) +
                              " exceeds tolerance at dim " + std::to_string(rho.rows()),
                          2 * rho.rows());
}

/// W(xi) rho W(xi)^dagger.
template <typename Real>
DensityMatrix<Real> displace(const DensityMatrix<Real>& rho, const Vec2<Real>& xi) {
  const auto w = weyl_operator<Real>(xi, rho.dim());
  return DensityMatrix<Real>::from_hermitized(w.matrix * rho.matrix() * w.matrix.adjoint());
}

/// Expectation tr(rho X).
template <typename Real>
Complex<Real> expectation(const DensityMatrix<Real>& rho, const FockOperator<Real>& x) {
  return (rho.matrix() * x.matrix).trace();
}

}  // namespace cqi
