#pragma once

// Named verification suites: every inequality or identity is evaluated over a
// family of test states and recorded as a signed margin.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cqi/fock.hpp"

namespace cqi::verify {

struct SuiteConfig {
  std::string suite_name;
  long dim = 128;
  int cases = 10;
  std::uint64_t seed = 1;
  double tolerance = 1e-3;
  std::vector<double> time_grid;
  std::map<std::string, double> extra;

  double extra_or(const std::string& key, double fallback) const {
    const auto it = extra.find(key);
    return it == extra.end() ? fallback : it->second;
  }
};

struct CaseRecord {
  int index = 0;
  std::string descriptor;
  std::map<std::string, double> parameters;
  /// Signed slack; the case passes when margin >= -tolerance.
  double margin = 0;
  double tolerance = 0;
  bool passed = false;
  /// Asserted cases gate the suite; reported cases are informational.
  bool asserted = true;
  HealthMetrics<double> health;
  std::string error;
  std::string note;
};

struct Summary {
  double min_margin = 0;
  int cases = 0;
  /// Asserted cases with margin < -tolerance (including backend errors).
  int failures = 0;
  int reported_failures = 0;
  bool passed = true;
};

/// Non-reproducible facts about a run, kept apart from the comparable payload.
struct Metadata {
  double wall_time_seconds = 0;
  std::string timestamp;
  std::string version;
};

struct VerificationReport {
  std::string suite_name;
  SuiteConfig config;
  std::vector<CaseRecord> cases;
  Summary summary;
  Metadata metadata;
};

/// Registered suite names, in a fixed order.
const std::vector<std::string>& suite_names();
bool is_registered(const std::string& name);

/// Built-in defaults for a suite (dimension, case count, tolerance, time grid, extras).
SuiteConfig default_config(const std::string& name);

/// Runs a suite. Throws InvalidArgument for unknown names; backend errors
/// become failed case records.
VerificationReport run_suite(const SuiteConfig& config);

/// Recomputes the summary from the case list (stable order by index).
Summary summarize(std::vector<CaseRecord>& cases);

enum class Threshold { Entropy206, Photon067 };

struct ThresholdResult {
  double root = 0;
  double residual = 0;
  /// Sign changes of the defining function found by a scan over (0, 10).
  int sign_changes = 0;
  /// For the entropy threshold, the thermal photon number g^{-1}(root).
  double photon_number_at_root = 0;
};

/// Bisection to 1e-6 of the threshold display.
double threshold_solve(Threshold which);
ThresholdResult threshold_analysis(Threshold which);

/// Defining functions: F(S0) + 1 - 2 log 2 and -n log(1 + 1/n) + 2 - 2 log 2.
double entropy_threshold_function(double s0);
double photon_threshold_function(double n);

/// 12 significant digits, the precision of every emitted number.
double round12(double x);

nlohmann::json to_json(const VerificationReport& report, bool include_metadata = true);
nlohmann::json to_json(const ThresholdResult& result, Threshold which);
std::string to_csv(const VerificationReport& report);

}  // namespace cqi::verify
