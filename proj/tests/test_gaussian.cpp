#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cqi/fock.hpp"
#include "cqi/gaussian.hpp"
#include "cqi/semigroups.hpp"

using namespace cqi;
using Kind = SemigroupKind<double>;
using Spec = GaussianStateSpec<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kLog2 = std::log(2.0);

SolverOptions<double> numeric() {
  SolverOptions<double> o;
  o.closed_form_fast_path = false;
  return o;
}

/// D(rho || sigma) from definitions for diagonal states.
double diag_relent(const RVector<double>& p, const RVector<double>& q) {
  double d = 0;
  for (Index k = 0; k < p.size(); ++k)
    if (p(k) > 0) d += p(k) * (std::log(p(k)) - std::log(q(k)));
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------
// g and thermal closed forms

TEST(GEntropy, Examples) {
  EXPECT_EQ(g_entropy(0.0), 0.0);
  EXPECT_NEAR(g_entropy(1.0), 2 * kLog2, 1e-15);
  EXPECT_NEAR(g_inverse(g_entropy(3.7)), 3.7, 1e-10);
  EXPECT_NEAR(g_derivative(1.0), kLog2, 1e-15);
  EXPECT_THROW(g_entropy(-1.0), InvalidArgument);
  EXPECT_THROW(g_inverse(-1.0), InvalidArgument);
}

TEST(GEntropy, InverseRoundTripAcrossScales) {
  for (double n : {1e-6, 1e-3, 0.2, 1.0, 12.0, 1e3}) EXPECT_NEAR(g_inverse(g_entropy(n)) / n, 1, 1e-10) << n;
  // For large n, g' ~ 1/n amplifies roundoff in S; check the forward residual instead.
  for (double s : {10.0, 20.0, 40.0}) EXPECT_NEAR(g_entropy(g_inverse(s)), s, 1e-13 * s) << s;
}

TEST(ThermalClosedForms, Examples) {
  EXPECT_NEAR(thermal_fisher_closed(1.0), 4 * kPi * kLog2, 1e-14);
  EXPECT_TRUE(std::isinf(thermal_fisher_closed(0.0)));
  EXPECT_NEAR(fisher_isoperimetric_ratio(100.0), 1.000008, 1e-6);
  EXPECT_NEAR(entropy_isoperimetric_product(100.0) / (4 * kPi * std::exp(1.0)), 1, 1e-2);
  EXPECT_NEAR(thermal_entropy_power_closed(1.0), 4.0, 1e-14);
}

TEST(ThermalClosedForms, SumIdentityAtZEqualsOne) {
  for (double n : {0.01, 0.3, 1.0, 5.0, 80.0}) {
    const auto j = j_pm_gaussian(2 * n + 1, 1.0);
    EXPECT_NEAR(j.j_minus + j.j_plus, thermal_fisher_closed(n) / (2 * kPi), 1e-12 * (1 + j.j_plus)) << n;
  }
}

// ---------------------------------------------------------------------------
// J-pair

TEST(JPair, ThermalOne) {
  const auto j = j_pm_gaussian(3.0, 1.0);
  EXPECT_NEAR(j.j_minus, -2 * kLog2, 1e-14);
  EXPECT_NEAR(j.j_plus, 4 * kLog2, 1e-14);
  EXPECT_FALSE(j.divergent);
  EXPECT_TRUE(j_pm_gaussian(1.0, 2.0).divergent);
  EXPECT_THROW(j_pm_gaussian(3.0, 0.5), InvalidArgument);
}

TEST(JPair, MinimizedAtUnitSqueezing) {
  for (double kappa : {1.1, 3.0, 10.0}) {
    const auto base = j_pm_gaussian(kappa, 1.0);
    for (double z = 1.01; z < 5; z *= 1.2) {
      const auto j = j_pm_gaussian(kappa, z);
      EXPECT_GT(j.j_minus, base.j_minus);
      EXPECT_GT(j.j_plus, base.j_plus);
    }
  }
}

TEST(JPair, GainRateAtLeastTwo) {
  for (int i = 0; i < 50; ++i)
    for (int k = 0; k < 50; ++k) {
      const double kappa = 1 + std::pow(10.0, -4 + 7.0 * i / 49);
      const double z = 1 + std::pow(10.0, -3 + 4.0 * k / 49);
      EXPECT_GE(j_pm_gaussian(kappa, z).j_plus, 2.0) << kappa << " " << z;
    }
}

TEST(JPair, MatchesFockEntropyRates) {
  for (double n : {0.5, 1.0, 2.0}) {
    const auto rho = thermal_state(n, 160);
    const auto j = j_pm_gaussian(2 * n + 1, 1.0);
    EXPECT_NEAR(entropy_rate(rho, Kind::attenuator()).value / j.j_minus, 1, 1e-3) << n;
    EXPECT_NEAR(entropy_rate(rho, Kind::amplifier()).value / j.j_plus, 1, 1e-3) << n;
  }
}

// ---------------------------------------------------------------------------
// Covariance evolution

TEST(GaussianEvolve, AttenuatorAndHeatOnThermal) {
  const double n = 1.7, t = 0.4;
  EXPECT_NEAR(gaussian_evolve(Spec::thermal(n), Kind::attenuator(), t).kappa, 2 * std::exp(-t) * n + 1, 1e-12);
  EXPECT_NEAR(gaussian_evolve(Spec::thermal(n), Kind::amplifier(), t).kappa,
              2 * (std::exp(t) * n + std::exp(t) - 1) + 1, 1e-12);
  const auto heat = gaussian_evolve(Spec::thermal(n), Kind::heat(), t);
  EXPECT_NEAR(heat.mean_photon_centered(), n + 2 * kPi * t, 1e-12);
  EXPECT_NEAR(heat.z, 1, 1e-12);
}

TEST(GaussianEvolve, CovarianceRoundTrip) {
  const auto s = Spec::make(Vec2<double>(0.3, -0.2), 2.5, 1.7, 0.6);
  const auto back = Spec::from_covariance(s.covariance(), s.mean);
  EXPECT_NEAR(back.kappa, 2.5, 1e-12);
  EXPECT_NEAR(back.z, 1.7, 1e-12);
  EXPECT_LT((back.covariance() - s.covariance()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(Spec::make(Vec2<double>::Zero(), 0.5, 1.0), InvalidArgument);
}

TEST(GaussianEvolve, AmplifierFirstOrderExpansion) {
  const double kappa = 2.2, z = 1.6, t = 1e-4;
  const auto out = gaussian_evolve(Spec::make(Vec2<double>::Zero(), kappa, z), Kind::amplifier(), t);
  const double first = kappa + t * ((z * z + 1 / (z * z)) / 2 + kappa);
  EXPECT_NEAR(out.kappa, first, 10 * t * t * (1 + kappa));
  EXPECT_GT(std::abs(out.kappa - kappa), 1e3 * std::abs(out.kappa - first));
}

TEST(GaussianEvolve, HeatMatchesFockNumeric) {
  for (double n : {0.5, 1.0, 4.0}) {
    const double t = 0.05;
    const double closed = gaussian_evolve(Spec::thermal(n), Kind::heat(), t).mean_photon_centered();
    const auto rho = evolve(thermal_state(n, 256), Kind::heat(), t, numeric());
    EXPECT_LT((rho.matrix() - thermal_state(closed, 256).matrix()).cwiseAbs().maxCoeff(), 1e-5) << n;
  }
}

TEST(GaussianEvolve, QouConvergesToFixedPoint) {
  const auto out = gaussian_evolve(Spec::thermal(3.0), Kind::qou(std::sqrt(2.0), 1.0), 40.0);
  EXPECT_NEAR(out.mean_photon_centered(), 1.0, 1e-12);
}

// ---------------------------------------------------------------------------
// qOU relative entropy and the h-function

TEST(QouRelent, Examples) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  EXPECT_NEAR(relent_to_qou_fixed(g_entropy(1.0), 1.0, mu, lambda), 0, 1e-14);
  EXPECT_NEAR(relent_to_qou_fixed(0.0, 0.0, mu, lambda), kLog2, 1e-14);
}

TEST(QouRelent, MatchesFockRelativeEntropy) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  const auto sigma = qou_fixed_point(mu, lambda, 128);
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto rho = random_state<double>(128, seed, RandomFamily::Diagonal);
    const double closed = relent_to_qou_fixed(von_neumann_entropy(rho), mean_photon(rho), mu, lambda);
    EXPECT_NEAR(relative_entropy(rho, sigma), closed, 1e-8) << seed;
    EXPECT_NEAR(diag_relent(rho.populations(), sigma.populations()), closed, 1e-8) << seed;
  }
}

TEST(HFunction, MinimumAtFixedPoint) {
  const auto m = h_minimize(std::sqrt(2.0), 1.0);
  EXPECT_NEAR(m.n_star, 1.0, 1e-14);
  EXPECT_NEAR(m.value, 0, 1e-12);
  EXPECT_NEAR(h_curvature_at_minimum(std::sqrt(2.0), 1.0), 0.5, 1e-14);
}

TEST(HFunction, RandomPairs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam(0.1, 3.0), gap(0.05, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double lambda = lam(rng), mu = lambda + gap(rng);
    const auto m = h_minimize(mu, lambda);
    EXPECT_NEAR(m.value, 0, 1e-12);
    EXPECT_NEAR(m.n_star, lambda * lambda / (mu * mu - lambda * lambda), 1e-12 * (1 + m.n_star));
    EXPECT_GT(h_curvature_at_minimum(mu, lambda), 0);
    for (int k = 0; k <= 120; ++k) EXPECT_GE(h_function(std::pow(10.0, -3 + k / 20.0), mu, lambda), -1e-12);
  }
}

TEST(HFunction, EqualsRateGapForThermalStates) {
  // -zeta D - dD/dt along the flow, with dn/dt = -zeta (n - n*) and D from the closed form.
  const double mu = 1.6, lambda = 0.9;
  const auto k = Kind::qou(mu, lambda);
  const double zeta = k.zeta(), ns = k.fixed_point_nbar();
  for (double n : {0.2, 1.0, 4.0}) {
    const double d = relent_to_qou_fixed(g_entropy(n), n, mu, lambda);
    const double dd = -zeta * (n - ns) * (std::log(k.nu()) * -1 - g_derivative(n));
    EXPECT_NEAR(h_function(n, mu, lambda), -zeta * d - dd, 1e-12) << n;
  }
}

TEST(ZetaWitness, Examples) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  EXPECT_FALSE(zeta_optimality_witness(mu, lambda, 0.0, 1e4).has_value());
  const auto w = zeta_optimality_witness(mu, lambda, 0.5, 1e4);
  ASSERT_TRUE(w.has_value());
  EXPECT_LT(*w, 1e4);
  EXPECT_LT(strengthened_rate_expression(*w, mu, lambda, 0.5), -1e-9);
  EXPECT_THROW(zeta_optimality_witness(mu, lambda, -0.1, 1e4), InvalidArgument);
}

TEST(LogSobolev, SpecialChoiceCancelsGainTerm) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  const auto c = log_sobolev_constants(mu, lambda, 1.0, log_sobolev_special_a(mu, lambda));
  EXPECT_NEAR(c.alpha_plus, 0, 1e-14);
  EXPECT_NEAR(c.alpha_minus, 0.5, 1e-14);
  // Bound holds on thermal states: h(n) >= -zeta n log(1+1/n) + delta.
  for (double n : {0.1, 0.66, 1.0, 3.0}) EXPECT_GE(h_function(n, mu, lambda), log_sobolev_photon_bound(n, mu, lambda) - 1e-12);
}

// ---------------------------------------------------------------------------
// Classical OU

TEST(ClassicalOU, Examples) {
  const auto p = ClassicalOUParams<double>::make(1.0, 1.0);
  const auto fixed = cou_step(p, p.stationary_variance(), 0.7);
  EXPECT_NEAR(fixed.relent, 0, 1e-15);
  EXPECT_NEAR(fixed.rate_margin, 0, 1e-15);
  EXPECT_GE(cou_step(p, 10.0, 0.0).rate_margin, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (double v : {1e2, 1e4, 1e6}) {
    const auto s = cou_step(p, v, 0.0);
    const double ratio = s.rate_margin / s.relent;
    EXPECT_LT(ratio, prev);
    prev = ratio;
  }
  EXPECT_LT(prev, 0.2);
  EXPECT_THROW(ClassicalOUParams<double>::make(0.0, 1.0), InvalidArgument);
}

TEST(ClassicalOU, MarginNonNegativeAndRateConsistent) {
  for (double theta : {0.3, 1.0, 2.5})
    for (double s2 : {0.5, 2.0})
      for (double v : {0.01, 0.3, 1.0, 7.0, 1e3})
        for (double t : {0.0, 0.1, 1.0, 5.0}) {
          const auto p = ClassicalOUParams<double>::make(theta, s2);
          const auto s = cou_step(p, v, t);
          EXPECT_GE(s.rate_margin, -1e-12);
          if (t == 0) continue;
          const double h = 1e-6;
          const double fd = (cou_step(p, v, t + h).relent - cou_step(p, v, t - h).relent) / (2 * h);
          EXPECT_NEAR(s.relent_rate, fd, 1e-5 * (1 + std::abs(fd)));
        }
}

TEST(Carbone, Examples) {
  const auto b = carbone_lsi2_bounds(std::sqrt(2.0), 1.0);
  EXPECT_NEAR(b.alpha_c_inv_lower, kLog2 / (5 * std::sqrt(5.0) * 2 * std::pow(0.5, 1.5)), 1e-14);
  EXPECT_LE(b.alpha2_lower, b.alpha2_upper);
  EXPECT_LE(b.alpha_c_lower, b.alpha_c_upper);
  EXPECT_LE(b.alpha_c_inv_lower, b.alpha_c_inv_upper);
}
