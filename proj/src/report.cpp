#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

#include "cqi/verify.hpp"

namespace cqi::verify {

using nlohmann::json;

double round12(double x) {
  if (!std::isfinite(x)) return x;
  if (x == 0) return 0;  // drops the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

namespace {

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return round12(x);
}

std::string csv_number(double x) {
  if (x == 0) x = 0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

Summary summarize(std::vector<CaseRecord>& cases) {
  std::stable_sort(cases.begin(), cases.end(),
                   [](const CaseRecord& a, const CaseRecord& b) { return a.index < b.index; });
  Summary s;
  s.cases = static_cast<int>(cases.size());
  s.min_margin = std::numeric_limits<double>::infinity();
  for (auto& c : cases) {
    c.passed = c.error.empty() && c.margin >= -c.tolerance;
    s.min_margin = std::min(s.min_margin, c.margin);
    if (!c.passed) (c.asserted ? s.failures : s.reported_failures)++;
  }
  if (cases.empty()) s.min_margin = 0;
  s.passed = s.failures == 0;
  return s;
}

json to_json(const VerificationReport& r, bool include_metadata) {
  json cfg;
  cfg["dim"] = r.config.dim;
  cfg["cases"] = r.config.cases;
  cfg["seed"] = r.config.seed;
  cfg["tolerance"] = number(r.config.tolerance);
  json grid = json::array();
  for (double t : r.config.time_grid) grid.push_back(number(t));
  cfg["time_grid"] = grid;
  json extra = json::object();
  for (const auto& [k, v] : r.config.extra) extra[k] = number(v);
  cfg["extra"] = extra;

  json cases = json::array();
  for (const auto& c : r.cases) {
    json jc;
    jc["index"] = c.index;
    jc["descriptor"] = c.descriptor;
    json params = json::object();
    for (const auto& [k, v] : c.parameters) params[k] = number(v);
    jc["parameters"] = params;
    jc["margin"] = number(c.margin);
    jc["tolerance"] = number(c.tolerance);
    jc["passed"] = c.passed;
    jc["asserted"] = c.asserted;
    jc["health"] = {{"edge_mass", number(c.health.edge_mass)},
                    {"trace_drift", number(c.health.trace_drift)},
                    {"unitarity_defect", number(c.health.unitarity_defect)},
                    {"flagged", c.health.flagged}};
    if (!c.error.empty()) jc["error"] = c.error;
    if (!c.note.empty()) jc["note"] = c.note;
    cases.push_back(std::move(jc));
  }

  json out;
  out["suite"] = r.suite_name;
  out["config"] = cfg;
  out["cases"] = cases;
  out["summary"] = {{"min_margin", number(r.summary.min_margin)},
                    {"cases", r.summary.cases},
                    {"failures", r.summary.failures},
                    {"reported_failures", r.summary.reported_failures},
                    {"passed", r.summary.passed}};
  if (include_metadata)
    out["metadata"] = {{"wall_time_seconds", number(r.metadata.wall_time_seconds)},
                       {"timestamp", r.metadata.timestamp},
                       {"version", r.metadata.version}};
  return out;
}

json to_json(const ThresholdResult& r, Threshold which) {
  json out;
  out["which"] = which == Threshold::Entropy206 ? "entropy" : "photon";
  out["root"] = number(r.root);
  out["residual"] = number(r.residual);
  out["sign_changes"] = r.sign_changes;
  out["unique_on_scan"] = r.sign_changes == 1;
  if (which == Threshold::Entropy206) {
    out["photon_number_at_root"] = number(r.photon_number_at_root);
    out["note"] =
        "root is an entropy in nats; the thermal photon number at that entropy is photon_number_at_root";
  }
  return out;
}

std::string to_csv(const VerificationReport& r) {
  std::ostringstream os;
  os << "index,descriptor,margin,tolerance,passed,asserted,edge_mass,error\n";
  for (const auto& c : r.cases) {
    os << c.index << ',' << csv_field(c.descriptor) << ',' << csv_number(c.margin) << ','
       << csv_number(c.tolerance) << ',' << (c.passed ? "true" : "false") << ','
       << (c.asserted ? "true" : "false") << ',' << csv_number(c.health.edge_mass) << ','
       << csv_field(c.error) << '\n';
  }
  return os.str();
}

}  // namespace cqi::verify
