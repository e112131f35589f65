#pragma once

// Gauss-Hermite rules by Golub-Welsch.

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "cqi/errors.hpp"

namespace cqi {

template <typename Real = double>
struct QuadratureRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

/// Physicists' rule: sum_i w_i f(x_i) ~ int exp(-x^2) f(x) dx.
template <typename Real = double>
QuadratureRule<Real> gauss_hermite(int order) {
  if (order < 1) throw InvalidArgument("gauss_hermite: order must be positive");
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  Mat jac = Mat::Zero(order, order);
  for (int k = 1; k < order; ++k) jac(k, k - 1) = jac(k - 1, k) = std::sqrt(Real(k) / 2);
  Eigen::SelfAdjointEigenSolver<Mat> es(jac);
  QuadratureRule<Real> rule;
  const Real mass = std::sqrt(Real(EIGEN_PI));
  for (int i = 0; i < order; ++i) {
    rule.nodes.push_back(es.eigenvalues()(i));
    const Real v0 = es.eigenvectors()(0, i);
    rule.weights.push_back(mass * v0 * v0);
  }
  return rule;
}

/// Rule for E[f(X)], X ~ N(0,1): nodes sqrt(2) x_i, weights w_i / sqrt(pi).
template <typename Real = double>
QuadratureRule<Real> standard_normal_rule(int order) {
  auto rule = gauss_hermite<Real>(order);
  const Real s = std::sqrt(Real(2));
  const Real inv = Real(1) / std::sqrt(Real(EIGEN_PI));
  for (auto& x : rule.nodes) x *= s;
  for (auto& w : rule.weights) w *= inv;
  return rule;
}

}  // namespace cqi
