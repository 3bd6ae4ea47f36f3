#pragma once

#include <span>
#include <vector>

#include "mip/common.hpp"

namespace mip {

struct UtilityEval {
  double value;      // u(x), always negative
  double deriv;      // u'(x), always positive
  double second;     // u''(x), always negative
  double tolerance;  // -u'/u'', the absolute risk tolerance
};

// Finite positive mixture of exponentials,
//
//   u(x) = -sum_k w_k exp(-a_k x),   w_k > 0, a_k > 0.
//
// Strictly increasing and strictly concave, tends to 0 at +inf and -inf at
// -inf.  Absolute risk aversion -u''/u' is a weighted average of the
// exponents, so it is pinched between the smallest and the largest a_k; the
// same holds for the ratio -u'/u.  These envelopes are what downstream bound
// checks lean on.
class ExpMixtureUtility {
public:
  struct Term {
    double weight;
    double alpha;
  };

  explicit ExpMixtureUtility(std::vector<Term> terms);

  // Value, first two derivatives and risk tolerance at x.  Internally the
  // dominant exponent is factored out, so the ratios (tolerance, deriv/value)
  // stay accurate even when the raw magnitudes approach the double range.
  UtilityEval eval(double x) const;

  double value(double x) const { return eval(x).value; }
  double marginal(double x) const { return eval(x).deriv; }

  // ln u'(x), computed without forming u' itself.  Exact slope -ara(x).
  double log_marginal(double x) const;

  // The x with u'(x) = y, for y > 0.  Closed form for a single term;
  // otherwise a bracketed Newton iteration on ln u'(x) = ln y, converged to
  // relative tolerance 1e-12 in y.
  double inverse_marginal(double y) const;

  double ara_lo() const { return ara_lo_; }
  double ara_hi() const { return ara_hi_; }
  bool single_term() const { return terms_.size() == 1; }
  const std::vector<Term>& terms() const { return terms_; }

  // Sweeps a grid and confirms the sign pattern (u < 0 < u', u'' < 0) and the
  // aversion/ratio envelopes.  Margins are signed distances to the nearest
  // bound; a negative margin is a violation.
  CheckReport verify_assumptions(std::span<const double> grid) const;

private:
  std::vector<Term> terms_;
  double ara_lo_;
  double ara_hi_;
};

// Economy-wide aversion envelope: the smallest c >= 1 with every maker's
// risk tolerance and aversion inside [1/c, c].
double economy_risk_bound(std::span<const ExpMixtureUtility> utilities);

}  // namespace mip
