#include <cmath>
#include <functional>

#include "cqi/classical.hpp"
#include "cqi/gaussian.hpp"
#include "cqi/verify.hpp"

namespace cqi::verify {

namespace {

constexpr double kScanLo = 1e-3;
constexpr double kScanHi = 10.0;
constexpr int kScanPoints = 2000;

int count_sign_changes(const std::function<double(double)>& f) {
  int changes = 0;
  double prev = f(kScanLo);
  for (int i = 1; i <= kScanPoints; ++i) {
    const double x = kScanLo + (kScanHi - kScanLo) * i / kScanPoints;
    const double v = f(x);
    if ((prev < 0) != (v < 0)) ++changes;
    prev = v;
  }
  return changes;
}

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  while (hi - lo > 1e-9) {
    const double mid = (lo + hi) / 2;
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return (lo + hi) / 2;
}

std::function<double(double)> defining_function(Threshold which) {
  if (which == Threshold::Entropy206) return entropy_threshold_function;
  return photon_threshold_function;
}

}  // namespace

double entropy_threshold_function(double s0) {
  return F_of_S0(s0, 2.0, 1.0) + 1.0 - 2.0 * std::log(2.0);
}

double photon_threshold_function(double n) {
  return -n * std::log1p(1.0 / n) + 2.0 - 2.0 * std::log(2.0);
}

ThresholdResult threshold_analysis(Threshold which) {
  const auto f = defining_function(which);
  ThresholdResult r;
  r.sign_changes = count_sign_changes(f);
  r.root = bisect(f, kScanLo, kScanHi);
  r.residual = f(r.root);
  if (which == Threshold::Entropy206) r.photon_number_at_root = g_inverse(r.root);
  return r;
}

double threshold_solve(Threshold which) { return threshold_analysis(which).root; }

}  // namespace cqi::verify
