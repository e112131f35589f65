#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cqi/classical.hpp"
#include "cqi/verify.hpp"

using namespace cqi;
using namespace cqi::verify;

namespace {

SuiteConfig small(const std::string& name, int cases) {
  SuiteConfig c = default_config(name);
  c.cases = cases;
  return c;
}

CaseRecord record(int index, double margin, double tol, bool asserted, std::string error = {}) {
  CaseRecord c;
  c.index = index;
  c.margin = margin;
  c.tolerance = tol;
  c.asserted = asserted;
  c.error = std::move(error);
  return c;
}

}  // namespace

TEST(Registry, ContainsEverySuite) {
  for (const char* name : {"data-processing", "stam", "de-bruijn", "fisher-isoperimetry", "concavity", "epi-heat",
                           "entropy-isoperimetry", "majorization", "correspondence", "geometric-optimality",
                           "rate-decay-identity", "log-sobolev", "cou", "threshold-0.67"})
    EXPECT_TRUE(is_registered(name)) << name;
  EXPECT_FALSE(is_registered("unknown-suite"));
  EXPECT_THROW(default_config("unknown-suite"), InvalidArgument);
  SuiteConfig c;
  c.suite_name = "unknown-suite";
  EXPECT_THROW(run_suite(c), InvalidArgument);
}

TEST(Registry, RejectsInvalidConfig) {
  auto c = default_config("cou");
  c.tolerance = 0;
  EXPECT_THROW(run_suite(c), InvalidArgument);
  c = default_config("cou");
  c.cases = 0;
  EXPECT_THROW(run_suite(c), InvalidArgument);
}

TEST(Summary, PassedIffMarginWithinTolerance) {
  std::vector<CaseRecord> cases{record(2, -0.5, 1.0, true), record(0, 0.3, 1e-3, true),
                                record(1, -2e-3, 1e-3, false), record(3, 1.0, 1e-3, true, "boom")};
  const auto s = summarize(cases);
  EXPECT_EQ(cases.front().index, 0);
  EXPECT_EQ(s.cases, 4);
  EXPECT_DOUBLE_EQ(s.min_margin, -0.5);
  EXPECT_EQ(s.failures, 1);
  EXPECT_EQ(s.reported_failures, 1);
  EXPECT_FALSE(s.passed);
  for (const auto& c : cases) EXPECT_EQ(c.passed, c.error.empty() && c.margin >= -c.tolerance);
}

TEST(Summary, NeverPassesWithAssertedViolation) {
  std::vector<CaseRecord> cases{record(0, 1, 1e-3, true), record(1, -1e-2, 1e-3, true)};
  EXPECT_FALSE(summarize(cases).passed);
  std::vector<CaseRecord> ok{record(0, 1, 1e-3, true), record(1, -1e-2, 1e-3, false)};
  EXPECT_TRUE(summarize(ok).passed);
}

TEST(Report, ReproducibleWithoutMetadata) {
  const auto cfg = small("majorization", 5);
  const auto a = to_json(run_suite(cfg), false).dump();
  const auto b = to_json(run_suite(cfg), false).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.find("timestamp"), std::string::npos);
}

TEST(Report, JsonSchema) {
  const auto r = run_suite(small("cou", 1));
  const auto j = to_json(r);
  EXPECT_EQ(j["suite"], "cou");
  for (const char* k : {"dim", "cases", "seed", "tolerance", "time_grid", "extra"}) EXPECT_TRUE(j["config"].contains(k)) << k;
  ASSERT_TRUE(j["cases"].is_array());
  EXPECT_FALSE(j["cases"].empty());
  for (const char* k : {"index", "descriptor", "parameters", "margin", "tolerance", "passed", "asserted", "health"})
    EXPECT_TRUE(j["cases"][0].contains(k)) << k;
  for (const char* k : {"min_margin", "cases", "failures", "reported_failures", "passed"})
    EXPECT_TRUE(j["summary"].contains(k)) << k;
  EXPECT_TRUE(j["metadata"].contains("timestamp"));
  EXPECT_EQ(j["metadata"]["version"], "1.0.0");
  EXPECT_EQ(j["summary"]["cases"].get<int>(), static_cast<int>(r.cases.size()));
}

TEST(Report, CsvHasOneRowPerCase) {
  const auto r = run_suite(small("cou", 1));
  std::istringstream is(to_csv(r));
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "index,descriptor,margin,tolerance,passed,asserted,edge_mass,error");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, static_cast<int>(r.cases.size()));
}

TEST(Report, Round12) {
  EXPECT_EQ(round12(0.1 + 0.2), 0.3);
  EXPECT_EQ(round12(1.0 / 3.0), 0.333333333333);
  EXPECT_TRUE(std::isinf(round12(std::numeric_limits<double>::infinity())));
}

TEST(Thresholds, PhotonRoot) {
  const auto r = threshold_analysis(Threshold::Photon067);
  EXPECT_NEAR(r.root, 0.672, 0.005);
  EXPECT_GE(r.root, 0.66);
  EXPECT_LE(r.root, 0.68);
  EXPECT_EQ(r.sign_changes, 1);
  // Independent check: the defining display changes sign across the root.
  const auto f = [](double n) { return -n * std::log1p(1 / n) + 2 - 2 * std::log(2.0); };
  EXPECT_LT(f(r.root - 1e-5) * f(r.root + 1e-5), 0);
  EXPECT_NEAR(photon_threshold_function(0.5), f(0.5), 1e-14);
}

TEST(Thresholds, EntropyRoot) {
  const auto r = threshold_analysis(Threshold::Entropy206);
  EXPECT_NEAR(r.root, 2.06, 0.05);
  EXPECT_EQ(r.sign_changes, 1);
  EXPECT_LT(std::abs(r.residual), 1e-5);
  EXPECT_NEAR(r.photon_number_at_root, g_inverse(r.root), 1e-10);
  EXPECT_NEAR(entropy_threshold_function(2.5), F_of_S0(2.5, 2.0, 1.0) + 1 - 2 * std::log(2.0), 1e-14);
  EXPECT_DOUBLE_EQ(threshold_solve(Threshold::Entropy206), r.root);
}

TEST(Suites, ThresholdSuiteReportsIndeterminateCase) {
  const auto r = run_suite(small("threshold-0.67", 3));
  EXPECT_TRUE(r.summary.passed);
  bool has_reported = false;
  for (const auto& c : r.cases) has_reported = has_reported || !c.asserted;
  EXPECT_TRUE(has_reported);
}

TEST(Suites, CouReportsLargeVarianceLimit) {
  const auto r = run_suite(default_config("cou"));
  EXPECT_TRUE(r.summary.passed);
  EXPECT_EQ(r.summary.failures, 0);
}

TEST(Suites, EverySuitePassesOnSmallConfig) {
  for (const auto& name : suite_names()) {
    if (name == "stam" || name == "entropy-isoperimetry") continue;  // run in full by the acceptance binary
    const auto r = run_suite(small(name, 2));
    EXPECT_TRUE(r.summary.passed) << name << " min margin " << r.summary.min_margin;
    EXPECT_FALSE(r.cases.empty()) << name;
    for (const auto& c : r.cases)
      if (c.asserted) EXPECT_TRUE(c.error.empty()) << name << ": " << c.error;
  }
}

TEST(Suites, SmallStamAndIsoperimetry) {
  for (const char* name : {"stam", "entropy-isoperimetry"}) {
    const auto r = run_suite(small(name, 1));
    EXPECT_TRUE(r.summary.passed) << name;
  }
}

TEST(Suites, BackendErrorsBecomeFailedCases) {
  // A dimension too small for the thermal sentinels must surface as case errors, not exceptions.
  auto cfg = small("de-bruijn", 1);
  cfg.dim = 8;
  const auto r = run_suite(cfg);
  EXPECT_FALSE(r.summary.passed);
  bool any_error = false;
  for (const auto& c : r.cases) any_error = any_error || !c.error.empty();
  EXPECT_TRUE(any_error);
}
