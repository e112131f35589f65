#include <gtest/gtest.h>

#include <cmath>

#include "cqi/fisher.hpp"
#include "cqi/fock.hpp"
#include "cqi/semigroups.hpp"

using namespace cqi;
using Rho = DensityMatrix<double>;
using CM = CMatrix<double>;
using Kind = SemigroupKind<double>;

namespace {

constexpr double kPi = 3.14159265358979323846;

double g_oracle(double n) { return (n + 1) * std::log(n + 1) - n * std::log(n); }

SolverOptions<double> numeric() {
  SolverOptions<double> o;
  o.closed_form_fast_path = false;
  return o;
}

double max_abs(const CM& m) { return m.cwiseAbs().maxCoeff(); }

/// Random state supported on the lowest `support` levels of a `dim` space.
Rho padded_random(Index support, Index dim, std::uint64_t seed) {
  const auto small = random_state<double>(support, seed, RandomFamily::FullRank);
  CM m = CM::Zero(dim, dim);
  m.topLeftCorner(support, support) = small.matrix();
  return Rho::from_matrix(m);
}

/// Double commutator form of the heat generator with explicit quadratures.
CM heat_oracle(const CM& rho) {
  const auto [q, p] = quadratures<double>(rho.rows());
  CM out = CM::Zero(rho.rows(), rho.cols());
  for (const CM* r : {&q.matrix, &p.matrix}) {
    const CM c = *r * rho - rho * *r;
    out -= kPi * (*r * c - c * *r);
  }
  return out;
}

/// Lindblad forms with the truncated ladder matrices.
CM attenuator_oracle(const CM& rho) {
  const auto l = ladder_operators<double>(rho.rows());
  const CM& a = l.annihilate.matrix;
  const CM n = a.adjoint() * a;
  return a * rho * a.adjoint() - 0.5 * (n * rho + rho * n);
}

CM amplifier_oracle(const CM& rho) {
  const auto l = ladder_operators<double>(rho.rows());
  const CM& a = l.annihilate.matrix;
  const CM m = a * a.adjoint();
  return a.adjoint() * rho * a - 0.5 * (m * rho + rho * m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Generators

TEST(Generator, AttenuatorOnNumberStates) {
  EXPECT_LT(max_abs(liouvillian_apply(Kind::attenuator(), number_state<double>(0, 8))), 1e-15);
  CM expected = CM::Zero(8, 8);
  expected(1, 1) = 2;
  expected(2, 2) = -2;
  EXPECT_LT(max_abs(liouvillian_apply(Kind::attenuator(), number_state<double>(2, 8)) - expected), 1e-14);
}

TEST(Generator, MatchesLadderOracles) {
  const auto rho = random_state<double>(24, 4, RandomFamily::FullRank);
  EXPECT_LT(max_abs(liouvillian_apply(Kind::attenuator(), rho) - attenuator_oracle(rho.matrix())), 1e-13);
  EXPECT_LT(max_abs(liouvillian_apply(Kind::amplifier(), rho) - amplifier_oracle(rho.matrix())), 1e-13);
  const double mu = 1.3, lambda = 0.7;
  const CM qou = mu * mu * attenuator_oracle(rho.matrix()) + lambda * lambda * amplifier_oracle(rho.matrix());
  EXPECT_LT(max_abs(liouvillian_apply(Kind::qou(mu, lambda), rho) - qou), 1e-13);
}

TEST(Generator, HeatMatchesDoubleCommutatorInInterior) {
  // The quadrature double commutator is only exact away from the truncation edge.
  const Index dim = 40;
  const auto rho = padded_random(16, dim, 11);
  const CM diff = liouvillian_apply(Kind::heat(), rho) - heat_oracle(rho.matrix());
  EXPECT_LT(max_abs(diff.topLeftCorner(dim - 4, dim - 4)), 1e-12);
}

TEST(Generator, TracelessAndHermitian) {
  const auto rho = padded_random(32, 64, 2);
  for (const auto& k : {Kind::heat(), Kind::attenuator(), Kind::amplifier(), Kind::qou(1.5, 1.0)}) {
    const CM l = liouvillian_apply(k, rho);
    EXPECT_LT(std::abs(l.trace()), 1e-10) << k.name();
    EXPECT_LT(max_abs(l - l.adjoint()), 1e-13) << k.name();
  }
}

TEST(Generator, Errors) {
  EXPECT_THROW(liouvillian_apply(Kind::heat(), Rho::diagonal(RVector<double>::Constant(3, 1.0 / 3))), InvalidDimension);
  // Gain generators refuse states with mass at the edge.
  EXPECT_THROW(liouvillian_apply(Kind::amplifier(), number_state<double>(15, 16)), TruncationError);
  EXPECT_THROW(Kind::qou(1.0, 1.0), InvalidArgument);
  EXPECT_THROW(Kind::qou(1.0, 2.0), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Time evolution

TEST(Evolve, AttenuatorThermalNumeric) {
  const auto out = evolve(thermal_state(1.0, 64), Kind::attenuator(), 0.5, numeric());
  EXPECT_LT(max_abs(out.matrix() - thermal_state(std::exp(-0.5), 64).matrix()), 1e-6);
}

TEST(Evolve, HeatThermalNumeric) {
  const double t = 0.1;
  const auto out = evolve(thermal_state(1.0, 256), Kind::heat(), t, numeric());
  EXPECT_LT(max_abs(out.matrix() - thermal_state(1 + 2 * kPi * t, 256).matrix()), 1e-5);
}

TEST(Evolve, FastPathAgreesWithIntegrator) {
  for (const auto& k : {Kind::heat(), Kind::attenuator(), Kind::amplifier(), Kind::qou(std::sqrt(2.0), 1.0)}) {
    const auto rho = thermal_state(0.8, 128);
    const auto fast = evolve(rho, k, 0.2);
    const auto slow = evolve(rho, k, 0.2, numeric());
    EXPECT_LT(max_abs(fast.matrix() - slow.matrix()), 1e-8) << k.name();
  }
}

TEST(Evolve, QouPhotonNumberFollowsClosedForm) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  const auto rho = random_state<double>(64, 5, RandomFamily::Diagonal);
  const double n0 = mean_photon(rho);
  for (double t : {0.1, 0.5, 1.0}) {
    const auto out = evolve(rho, Kind::qou(mu, lambda), t);
    EXPECT_NEAR(mean_photon(out), std::exp(-t) * n0 + (1 - std::exp(-t)), 1e-6) << t;
    EXPECT_NEAR(photon_trajectory(n0, mu, lambda, t), mean_photon(out), 1e-6);
  }
}

TEST(Evolve, SemigroupProperty) {
  const auto rho = padded_random(12, 96, 8);
  for (const auto& k : {Kind::heat(), Kind::attenuator(), Kind::qou(1.2, 0.6)}) {
    const auto two = evolve(evolve(rho, k, 0.04), k, 0.06);
    const auto one = evolve(rho, k, 0.1);
    EXPECT_LT(max_abs(two.matrix() - one.matrix()), 1e-6) << k.name();
  }
}

TEST(Evolve, ZeroTimeAndErrors) {
  const auto rho = random_state<double>(16, 1, RandomFamily::FullRank);
  EXPECT_TRUE(evolve(rho, Kind::heat(), 0.0).matrix() == rho.matrix());
  EXPECT_THROW(evolve(rho, Kind::heat(), -1.0), InvalidArgument);
  SolverOptions<double> strict = numeric();
  strict.trace_tolerance = 1e-20;
  EXPECT_THROW(evolve(rho, Kind::attenuator(), 0.5, strict), StepSizeError);
  EXPECT_THROW(evolve(number_state<double>(8, 16), Kind::amplifier(), 1.0), TruncationError);
}

TEST(Evolve, PreservesStateInvariants) {
  const auto rho = padded_random(12, 96, 9);
  for (const auto& k : {Kind::heat(), Kind::attenuator(), Kind::amplifier()}) {
    const auto out = evolve(rho, k, 0.1);
    EXPECT_NO_THROW(Rho::validate(out.matrix())) << k.name();
  }
}

TEST(PhotonTrajectory, Limits) {
  EXPECT_DOUBLE_EQ(photon_trajectory(3.0, std::sqrt(2.0), 1.0, 0.0), 3.0);
  EXPECT_NEAR(photon_trajectory(3.0, std::sqrt(2.0), 1.0, 60.0), 1.0, 1e-12);
  EXPECT_THROW(photon_trajectory(1.0, std::sqrt(2.0), 1.0, -1.0), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Convolution

TEST(Convolve, IdentityAtom) {
  const auto rho = random_state<double>(32, 3, RandomFamily::FullRank);
  const auto f = AtomMixture<double>::make({Vec2<double>(0, 0)}, {1.0});
  EXPECT_LT(max_abs(convolve<double>(f, rho, 0.7).matrix() - rho.matrix()), 1e-13);
}

TEST(Convolve, StandardGaussianIsHeatFlow) {
  const double t = 0.1;
  const auto rho = thermal_state(1.0, 128);
  const auto a = convolve<double>(GaussianDensity<double>::standard(), rho, t);
  const auto b = evolve(rho, Kind::heat(), t, numeric());
  EXPECT_LT(max_abs(a.matrix() - b.matrix()), 1e-6);
}

TEST(Convolve, StandardGaussianIsHeatFlowOnRandomState) {
  const double t = 0.05;
  const auto rho = random_state<double>(96, 21, RandomFamily::FullRank);
  const auto a = convolve<double>(GaussianDensity<double>::standard(), rho, t);
  const auto b = evolve(rho, Kind::heat(), t, numeric());
  EXPECT_LT(max_abs(a.matrix() - b.matrix()), 1e-6);
}

TEST(Convolve, GaussiansAddUnderComposition) {
  const auto rho = random_state<double>(96, 6, RandomFamily::FullRank);
  Mat2<double> c1, c2;
  c1 << 0.06, 0.01, 0.01, 0.03;
  c2 << 0.02, -0.005, -0.005, 0.05;
  const auto f1 = GaussianDensity<double>::make(Vec2<double>(0.05, -0.02), c1);
  const auto f2 = GaussianDensity<double>::make(Vec2<double>(-0.01, 0.03), c2);
  const auto f12 = GaussianDensity<double>::make(f1.mean + f2.mean, c1 + c2);
  const auto lhs = convolve<double>(f1, convolve<double>(f2, rho, 1.0), 1.0);
  const auto rhs = convolve<double>(f12, rho, 1.0);
  EXPECT_LT(max_abs(lhs.matrix() - rhs.matrix()), 1e-6);
}

TEST(Convolve, AtomScalingLaw) {
  const auto rho = random_state<double>(64, 12, RandomFamily::FullRank);
  const std::vector<Vec2<double>> pts{{0.1, 0.2}, {-0.3, 0.05}, {0.0, -0.15}};
  const std::vector<double> w{0.5, 0.3, 0.2};
  const double t = 0.4;
  std::vector<Vec2<double>> scaled;
  for (const auto& p : pts) scaled.push_back(std::sqrt(t) * p);
  const auto a = convolve<double>(AtomMixture<double>::make(pts, w), rho, t);
  const auto b = convolve<double>(AtomMixture<double>::make(scaled, w), rho, 1.0);
  EXPECT_LT(max_abs(a.matrix() - b.matrix()), 1e-8);
}

TEST(Convolve, CompatibleWithHeatFlow) {
  const auto rho = random_state<double>(96, 13, RandomFamily::FullRank);
  Mat2<double> c;
  c << 0.8, 0.2, 0.2, 0.5;
  const auto f = GaussianDensity<double>::make(Vec2<double>(0.1, -0.05), c);
  const double t = 0.1, nu = 0.5, mu = 0.05, xi = mu + t * nu;
  const auto lhs = evolve(convolve<double>(f, rho, t), Kind::heat(), xi, numeric());
  const auto rhs = convolve<double>(heat_evolved(f, nu), evolve(rho, Kind::heat(), mu, numeric()), t);
  EXPECT_LT(max_abs(lhs.matrix() - rhs.matrix()), 1e-5);
}

TEST(Convolve, CovariantUnderDisplacement) {
  const auto rho = random_state<double>(96, 14, RandomFamily::FullRank);
  Mat2<double> c;
  c << 0.7, -0.1, -0.1, 1.1;
  const PhaseDensity<double> f = GaussianDensity<double>::make(Vec2<double>(0.02, 0.04), c);
  const double t = 0.08;
  const Vec2<double> wq(0.1, -0.05), wc(0.2, 0.1);
  const Vec2<double> w = wq + std::sqrt(t) * wc;
  const auto lhs = displace(convolve<double>(f, rho, t), w);
  const auto rhs = convolve<double>(shifted(f, wc), displace(rho, wq), t);
  EXPECT_LT(max_abs(lhs.matrix() - rhs.matrix()), 1e-5);
}

TEST(Convolve, Errors) {
  const auto rho = thermal_state(1.0, 64);
  EXPECT_THROW(convolve<double>(GaussianDensity<double>::standard(), rho, 0.1, 4), InvalidArgument);
  EXPECT_THROW(convolve<double>(GaussianDensity<double>::standard(), rho, -0.1), InvalidArgument);
  Mat2<double> bad;
  bad << 1, 0, 0, -1;
  EXPECT_THROW(GaussianDensity<double>::make(Vec2<double>(0, 0), bad), InvalidArgument);
  EXPECT_THROW(AtomMixture<double>::make({Vec2<double>(0, 0)}, {0.5}), InvalidArgument);
  // A wide density at a small dimension cannot be resolved.
  EXPECT_THROW(convolve<double>(GaussianDensity<double>::standard(), thermal_state(1.0, 48), 2.0), Error);
}

// ---------------------------------------------------------------------------
// Entropy rates

TEST(EntropyRate, ThermalClosedForms) {
  const auto w1 = thermal_state(1.0, 128);
  EXPECT_NEAR(entropy_rate(w1, Kind::attenuator()).value, -2 * std::log(2.0), 1e-3);
  EXPECT_NEAR(entropy_rate(w1, Kind::amplifier()).value, 4 * std::log(2.0), 1e-3);
  for (double n : {0.5, 2.0}) {
    const auto w = thermal_state(n, 128);
    EXPECT_NEAR(entropy_rate(w, Kind::amplifier()).value, 2 * (n + 1) * std::log1p(1 / n), 1e-3) << n;
  }
}

TEST(EntropyRate, MatchesExactDerivative) {
  const auto rho = random_state<double>(96, 17, RandomFamily::FullRank);
  for (const auto& k : {Kind::heat(), Kind::attenuator(), Kind::amplifier()}) {
    const double exact = 2 * entropy_derivative_exact(rho, k);
    EXPECT_NEAR(entropy_rate(rho, k).value / exact, 1, 1e-3) << k.name();
  }
}

TEST(EntropyRate, SumIdentityWithFisher) {
  const auto rho = random_state<double>(128, 19, RandomFamily::FullRank);
  const double jm = entropy_rate(rho, Kind::attenuator()).value;
  const double jp = entropy_rate(rho, Kind::amplifier()).value;
  const double j = quantum_fisher(rho).value;
  EXPECT_NEAR(2 * kPi * (jm + jp) / j, 1, 1e-2);
}

TEST(EntropyRate, DeBruijnOnThermalAndRandom) {
  for (double n : {0.5, 1.0, 2.0}) {
    const auto w = thermal_state(n, 128);
    EXPECT_NEAR(entropy_rate(w, Kind::heat()).value / quantum_fisher(w).value, 1, 1e-2) << n;
  }
  const auto rho = random_state<double>(128, 23, RandomFamily::FullRank);
  EXPECT_NEAR(entropy_rate(rho, Kind::heat()).value / quantum_fisher(rho).value, 1, 1e-2);
}

TEST(EntropyRate, Errors) {
  EXPECT_THROW(entropy_rate(number_state<double>(1, 16), Kind::attenuator()), IllConditioned);
  EXPECT_THROW(entropy_rate(thermal_state(1.0, 64), Kind::attenuator(), 1e-1), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Relative-entropy decay toward the qOU fixed point

TEST(DecayRate, FixedPointIsStationary) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  const auto r = relent_decay_rate(qou_fixed_point(mu, lambda, 128), mu, lambda);
  EXPECT_NEAR(r.rate.value, 0, 1e-6);
  EXPECT_NEAR(r.divergence, 0, 1e-10);
}

TEST(DecayRate, IdentityOnThermalState) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  const auto r = relent_decay_rate(thermal_state(2.0, 128), mu, lambda);
  EXPECT_NEAR(r.rate_from_identity / r.rate.value, 1, 1e-3);
  // Independent value: D and dD/dt for thermal states in closed form.
  const double nt_dot = -(2.0 - 1.0);  // dn/dt = -zeta (n - n_inf) with zeta = 1
  const double d_oracle = -g_oracle(2.0) + 2.0 * std::log(2.0) + std::log(2.0);
  const double rate_oracle = nt_dot * (-std::log1p(1 / 2.0) + std::log(2.0));
  EXPECT_NEAR(r.divergence, d_oracle, 1e-10);
  EXPECT_NEAR(r.rate.value, rate_oracle, 1e-6);
}

TEST(DecayRate, IdentityOnRandomDiagonalStates) {
  const double mu = std::sqrt(2.0), lambda = 1.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto r = relent_decay_rate(random_state<double>(128, s, RandomFamily::Diagonal), mu, lambda);
    EXPECT_NEAR(r.rate_from_identity / r.rate.value, 1, 1e-3) << s;
  }
}

TEST(DecayRate, GaussianRateBoundedByZeta) {
  const double mu = std::sqrt(2.0), lambda = 1.0, zeta = 1.0;
  for (double n : {0.1, 0.5, 2.0, 5.0}) {
    const auto r = relent_decay_rate(thermal_state(n, 192), mu, lambda);
    EXPECT_LE(r.rate.value, -zeta * r.divergence + 1e-6) << n;
  }
}

// ---------------------------------------------------------------------------
// Data processing

TEST(DataProcessing, GaussianPairContracts) {
  const auto rho = random_state<double>(96, 31, RandomFamily::FullRank);
  const auto sigma = random_state<double>(96, 32, RandomFamily::FullRank);
  Mat2<double> c1, c2;
  c1 << 1.0, 0.2, 0.2, 0.7;
  c2 << 0.8, 0.0, 0.0, 1.2;
  const auto f = GaussianDensity<double>::make(Vec2<double>(0.1, 0.0), c1);
  const auto g = GaussianDensity<double>::make(Vec2<double>(-0.1, 0.05), c2);
  const double t = 0.05;
  const double lhs = relative_entropy(convolve<double>(f, rho, t, 40), convolve<double>(g, sigma, t, 40));
  EXPECT_LE(lhs, gaussian_density_divergence(f, g) + relative_entropy(rho, sigma) + 1e-6);
}
