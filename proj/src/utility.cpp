#include "mip/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shifted power sums S_p = sum_k w_k a_k^p exp(-a_k x - shift) with
// shift = max_k(-a_k x), so the largest term in S_0 is O(1).
struct ShiftedSums {
  double shift;
  double s0, s1, s2;
};

ShiftedSums shifted_sums(const std::vector<ExpMixtureUtility::Term>& terms, double x) {
  double shift = -kInf;
  for (const auto& t : terms) shift = std::max(shift, -t.alpha * x);
  ShiftedSums s{shift, 0.0, 0.0, 0.0};
  for (const auto& t : terms) {
    const double e = std::exp(-t.alpha * x - shift);
    const double we = t.weight * e;
    s.s0 += we;
    s.s1 += we * t.alpha;
    s.s2 += we * t.alpha * t.alpha;
  }
  return s;
}

}  // namespace

ExpMixtureUtility::ExpMixtureUtility(std::vector<Term> terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw ValidationError("utility needs at least one mixture term");
  ara_lo_ = kInf;
  ara_hi_ = 0.0;
  for (const auto& t : terms_) {
    if (!(t.weight > 0.0) || !std::isfinite(t.weight))
      throw ValidationError("utility term weight must be strictly positive and finite");
    if (!(t.alpha > 0.0) || !std::isfinite(t.alpha))
      throw ValidationError("utility term exponent must be strictly positive and finite");
    ara_lo_ = std::min(ara_lo_, t.alpha);
    ara_hi_ = std::max(ara_hi_, t.alpha);
  }
}

UtilityEval ExpMixtureUtility::eval(double x) const {
  const ShiftedSums s = shifted_sums(terms_, x);
  const double scale = std::exp(s.shift);
  return UtilityEval{-scale * s.s0, scale * s.s1, -scale * s.s2, s.s1 / s.s2};
}

double ExpMixtureUtility::log_marginal(double x) const {
  const ShiftedSums s = shifted_sums(terms_, x);
  return s.shift + std::log(s.s1);
}

double ExpMixtureUtility::inverse_marginal(double y) const {
  if (!(y > 0.0) || !std::isfinite(y))
    throw ValidationError("inverse marginal utility requires y > 0");
  if (terms_.size() == 1)
    return std::log(terms_[0].weight * terms_[0].alpha / y) / terms_[0].alpha;

  const double log_y = std::log(y);
  // Bracket from the single-term inverses: each term alone under-counts u',
  // and K * (largest term) over-counts it.
  double lo = -kInf, hi = -kInf;
  const double log_k = std::log(static_cast<double>(terms_.size()));
  for (const auto& t : terms_) {
    const double base = std::log(t.weight * t.alpha) - log_y;
    lo = std::max(lo, base / t.alpha);
    hi = std::max(hi, (base + log_k) / t.alpha);
  }

  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const ShiftedSums s = shifted_sums(terms_, x);
    const double h = s.shift + std::log(s.s1) - log_y;  // ln u'(x) - ln y
    if (h > 0.0)
      lo = std::max(lo, x);  // u' too large, root lies to the right
    else
      hi = std::min(hi, x);
    if (std::abs(h) <= 1e-13) return x;
    const double ara = s.s2 / s.s1;  // -(d/dx) ln u'
    double next = x + h / ara;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) return x;
    x = next;
  }
  return x;
}

CheckReport ExpMixtureUtility::verify_assumptions(std::span<const double> grid) const {
  CheckReport report;
  double worst_value = -kInf, worst_deriv = kInf, worst_second = -kInf;
  double ara_margin = kInf, ratio_margin = kInf;
  for (double x : grid) {
    const UtilityEval e = eval(x);
    worst_value = std::max(worst_value, e.value);
    worst_deriv = std::min(worst_deriv, e.deriv);
    worst_second = std::max(worst_second, e.second);
    const double ara = -e.second / e.deriv;
    const double ratio = -e.deriv / e.value;
    ara_margin = std::min({ara_margin, ara - ara_lo_, ara_hi_ - ara});
    ratio_margin = std::min({ratio_margin, ratio - ara_lo_, ara_hi_ - ratio});
  }
  report.items.push_back({"value_negative", worst_value < 0.0, -worst_value, "u < 0"});
  report.items.push_back({"deriv_positive", worst_deriv > 0.0, worst_deriv, "u' > 0"});
  report.items.push_back({"second_negative", worst_second < 0.0, -worst_second, "u'' < 0"});
  report.items.push_back({"aversion_in_envelope", ara_margin >= -1e-12, ara_margin,
                          "-u''/u' inside the term exponent range"});
  report.items.push_back({"ratio_in_envelope", ratio_margin >= -1e-12, ratio_margin,
                          "-u'/u inside the term exponent range"});
  return report;
}

double economy_risk_bound(std::span<const ExpMixtureUtility> utilities) {
  double c = 1.0;
  for (const auto& u : utilities) c = std::max({c, u.ara_hi(), 1.0 / u.ara_lo()});
  return c;
}

}  // namespace mip
