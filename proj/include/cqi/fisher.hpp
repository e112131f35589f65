#pragma once

// Divergence-based quantum Fisher information and the classical Fisher
// quantities of Gaussian phase-space densities.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "cqi/errors.hpp"
#include "cqi/fock.hpp"
#include "cqi/semigroups.hpp"

namespace cqi {

template <typename Real = double>
struct FisherEstimate {
  Real value = 0;
  Real stencil_h = 0;
  Real error_estimate = 0;
};

inline constexpr double kDefaultFisherStep = 1e-2;

namespace detail {

/// State and log-state in the eigenbasis of one phase-space axis.
template <typename Real>
struct AxisPair {
  DisplacementAxis<Real> axis;
  CMatrix<Real> rho;
  CMatrix<Real> log_rho;
};

template <typename Real>
CMatrix<Real> full_rank_log(const DensityMatrix<Real>& rho, const char* where) {
  const auto s = spectrum(rho);
  if (!is_full_rank(s))
    throw IllConditioned(std::string(where) + ": state not full rank (min eigenvalue " +
                         format_real(double(s.min())) + ")");
  RVector<Real> logs = s.values.array().log();
  return s.vectors * logs.template cast<Complex<Real>>().asDiagonal() * s.vectors.adjoint();
}

/// D(rho||rho^(+s u)) + D(rho||rho^(-s u)) = sum_kl 4 sin^2(s (g_k - g_l)/2) rho_lk (log rho)_kl,
/// evaluated without cancellation.
template <typename Real>
Real symmetric_divergence(const AxisPair<Real>& p, Real s) {
  const auto& g = p.axis.spectrum();
  const Index n = g.size();
  Real acc = 0;
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l) {
      const Real sn = std::sin(s * (g(k) - g(l)) / 2);
      acc += 4 * sn * sn * (std::conj(p.rho(k, l)) * p.log_rho(k, l)).real();
    }
  return acc;
}

}  // namespace detail

/// J(rho): trace of the divergence Hessian of theta -> D(rho || W(c theta) rho W^dagger)
/// at zero, from the symmetric stencil with one Richardson step over (h, h/2).
/// `scale` is the reparametrization factor c; the result scales as c^2.
template <typename Real>
FisherEstimate<Real> quantum_fisher(const DensityMatrix<Real>& rho, Real h = Real(kDefaultFisherStep),
                                    Real scale = 1, Real edge_tol = Real(kDefaultEdgeTolerance)) {
  if (!(h >= Real(1e-4) && h <= Real(1e-1))) throw InvalidArgument("quantum_fisher: h must lie in [1e-4, 1e-1]");
  if (!(scale != 0) || !std::isfinite(scale)) throw InvalidArgument("quantum_fisher: scale must be finite, non-zero");
  const CMatrix<Real> log_rho = detail::full_rank_log(rho, "quantum_fisher");
  Real j_h = 0, j_h2 = 0;
  for (int dir = 0; dir < 2; ++dir) {
    const Vec2<Real> u = dir == 0 ? Vec2<Real>(1, 0) : Vec2<Real>(0, 1);
    detail::AxisPair<Real> p{DisplacementAxis<Real>(u, rho.dim()), {}, {}};
    p.rho = p.axis.to_axis_basis(rho.matrix());
    p.log_rho = p.axis.to_axis_basis(log_rho);
    const Real s = scale * h;
    require_interior<Real>(p.axis.from_axis_basis(p.axis.conjugate_in_axis_basis(p.rho, s)), edge_tol,
                           "quantum_fisher");
    j_h += detail::symmetric_divergence(p, s) / (h * h);
    j_h2 += detail::symmetric_divergence(p, s / 2) / (h * h / 4);
  }
  return {(4 * j_h2 - j_h) / 3, h, std::abs(j_h2 - j_h) / 3};
}

/// tr(cov^{-1}): Fisher information of the translation family of a Gaussian on R^2.
template <typename Real>
Real classical_fisher_gaussian(const Mat2<Real>& cov) {
  Eigen::SelfAdjointEigenSolver<Mat2<Real>> es(cov);
  if (!(es.eigenvalues().minCoeff() > 0)) throw InvalidArgument("classical_fisher_gaussian: covariance not SPD");
  return (Real(1) / es.eigenvalues().array()).sum();
}

/// Differential entropy 1 + log(2 pi) + log(det cov)/2 of a Gaussian on R^2.
template <typename Real>
Real gaussian_density_entropy(const Mat2<Real>& cov) {
  const Real det = cov.determinant();
  if (!(det > 0) || !(cov.trace() > 0)) throw InvalidArgument("gaussian_density_entropy: covariance not SPD");
  return 1 + std::log(Real(2 * EIGEN_PI)) + std::log(det) / 2;
}

/// Kullback-Leibler divergence D(f||g) between Gaussians on R^2.
template <typename Real>
Real gaussian_density_divergence(const GaussianDensity<Real>& f, const GaussianDensity<Real>& g) {
  const Mat2<Real> ginv = g.cov.inverse();
  const Vec2<Real> d = g.mean - f.mean;
  return ((ginv * f.cov).trace() + d.dot(ginv * d) - 2 + std::log(g.cov.determinant() / f.cov.determinant())) / 2;
}

/// J(f *_t rho)^{-1} - J(rho)^{-1} - t J(f)^{-1}.
template <typename Real>
Real stam_margin(const GaussianDensity<Real>& f, const DensityMatrix<Real>& rho, Real t,
                 Real h = Real(kDefaultFisherStep), int quad_order = kDefaultQuadOrder) {
  const auto mixed = convolve<Real>(f, rho, t, quad_order);
  return 1 / quantum_fisher(mixed, h).value - 1 / quantum_fisher(rho, h).value -
         t / classical_fisher_gaussian(f.cov);
}

}  // namespace cqi
