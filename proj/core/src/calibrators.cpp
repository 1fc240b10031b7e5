#include "eclosure/calibrators.hpp"

#include <algorithm>
#include <cmath>

namespace eclosure {

namespace {

constexpr double kInvE = 0.36787944117144232159552377016146;
constexpr double kE = 2.71828182845904523536028747135266;

}  // namespace

double lambert_w_minus1(double x) {
  const double branch = -kInvE;
  if (std::isnan(x) || x >= 0.0 || x < branch * (1.0 + 1e-15)) {
    throw DomainError("lambert_w_minus1 requires x in [-1/e, 0)");
  }
  const double q = std::max(0.0, 1.0 + kE * x);
  if (q == 0.0) return -1.0;

  double w;
  if (q < 0.25) {
    // Series about the branch point in p = -sqrt(2(1 + e x)).
    const double p = -std::sqrt(2.0 * q);
    w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  } else {
    const double l1 = std::log(-x);
    w = l1 - std::log(-l1);
  }

  for (int iter = 0; iter < 100; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::fabs(f) <= 1e-16 * std::fabs(x)) break;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0) break;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    double next = w - step;
    if (next > -1.0) next = (w - 1.0) / 2.0;  // stay on the lower branch
    if (std::fabs(next - w) <= 1e-15 * std::fabs(next)) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

SuConstants::SuConstants(double a) : alpha(a) {
  validate_alpha(a);
  ell = -lambert_w_minus1(-a * kInvE);
  if (ell < 1.0) ell = 1.0;
}

double su_calibrate(double p, const SuConstants& su) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-value must lie in [0, 1]");
  return 1.0 / std::max(su.ell * p, su.alpha);
}

double su_calibrate(double p, double alpha) { return su_calibrate(p, SuConstants(alpha)); }

HarmonicTable::HarmonicTable(int m) : h_(static_cast<std::size_t>(std::max(m, 0)) + 1, 0.0) {
  for (int k = 1; k <= m; ++k) h_[k] = h_[k - 1] + 1.0 / k;
}

double harmonic(int k) {
  double h = 0.0;
  for (int i = 1; i <= k; ++i) h += 1.0 / i;
  return h;
}

double snapped_ceil(double x) {
  const double r = std::round(x);
  if (std::fabs(x - r) <= 1e-12 * std::max(1.0, std::fabs(x))) return r;
  return std::ceil(x);
}

double by_calibrate(double p, int k, double alpha, double h_k) {
  validate_alpha(alpha);
  if (k < 1) throw DomainError("by_calibrate requires k >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p-value must lie in [0, 1]");
  // h_k p <= alpha  <=>  ceil(k h_k p / alpha) <= k, so one snapped ceiling
  // decides both the indicator and the denominator consistently.
  const double c = snapped_ceil(k * h_k * p / alpha);
  if (c > k) return 0.0;
  return k / (alpha * std::max(c, 1.0));
}

double by_calibrate(double p, int k, double alpha) {
  return by_calibrate(p, k, alpha, harmonic(k));
}

double simes_p(const std::vector<double>& p_values, Subset s) {
  if (s.empty()) throw DomainError("simes_p requires a nonempty set");
  std::vector<double> ps;
  ps.reserve(s.size());
  for (int i : s.indices()) ps.push_back(p_values.at(i));
  std::sort(ps.begin(), ps.end());
  const double n = static_cast<double>(ps.size());
  double best = 1.0;
  for (std::size_t i = 0; i < ps.size(); ++i) best = std::min(best, n * ps[i] / (i + 1.0));
  return best;
}

double simes_p(const ValueVector& p_values, Subset s) {
  p_values.require(ValueKind::pvalue, "simes_p");
  return simes_p(p_values.values(), s);
}

}  // namespace eclosure
