#include "mip/representative.hpp"

#include <cmath>
#include <limits>

namespace mip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_weights(std::span<const ExpMixtureUtility> utilities, const Eigen::VectorXd& v) {
  if (utilities.empty()) throw ValidationError("representative maker needs at least one utility");
  if (v.size() != static_cast<Eigen::Index>(utilities.size()))
    throw ValidationError("weight vector length does not match the number of makers");
  for (Eigen::Index m = 0; m < v.size(); ++m)
    if (!(v[m] >= 1e-300) || !std::isfinite(v[m]))
      throw ValidationError("maker weights must be finite and at least 1e-300");
}

}  // namespace

RepresentativeEval eval_representative(std::span<const ExpMixtureUtility> utilities,
                                       const Eigen::VectorXd& v, double x) {
  validate_weights(utilities, v);
  if (!std::isfinite(x)) throw ValidationError("total cash amount must be finite");
  const int m_count = static_cast<int>(utilities.size());

  RepresentativeEval out;
  out.alloc.resize(m_count);
  out.tolerances.resize(m_count);
  out.iterations = 0;

  Eigen::VectorXd log_v = v.array().log();

  // Scalar root-find for s = ln y: phi(s) = sum_m I_m(exp(s) / v_m) - x is
  // strictly decreasing with slope -sum_m t_m, so a Newton step on s is
  // phi / T, safeguarded by the bracket collected along the way.
  auto split_at = [&](double s, Eigen::VectorXd& alloc, Eigen::VectorXd& tol) {
    double sum = 0.0, tsum = 0.0;
    for (int m = 0; m < m_count; ++m) {
      const double xm = utilities[m].inverse_marginal(std::exp(s - log_v[m]));
      const UtilityEval e = utilities[m].eval(xm);
      alloc[m] = xm;
      tol[m] = e.tolerance;
      sum += xm;
      tsum += e.tolerance;
    }
    return std::pair{sum - x, tsum};
  };

  double s;
  if (m_count == 1) {
    s = log_v[0] + utilities[0].log_marginal(x);
  } else {
    s = 0.0;
    for (int m = 0; m < m_count; ++m)
      s += log_v[m] + utilities[m].log_marginal(x / m_count);
    s /= m_count;
  }

  const double tol_phi = 1e-12 * std::max(1.0, std::abs(x));
  double lo = -kInf, hi = kInf;
  for (int it = 0; it < 200; ++it) {
    ++out.iterations;
    auto [phi, tsum] = split_at(s, out.alloc, out.tolerances);
    if (phi > 0.0)
      lo = std::max(lo, s);  // too much allocated: y must grow
    else
      hi = std::min(hi, s);
    if (std::abs(phi) <= tol_phi) break;
    if (it == 199)
      throw SolverError("representative split did not converge", std::abs(phi), out.iterations);
    double next = s + phi / tsum;
    if (!(next > lo && next < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi))
        next = 0.5 * (lo + hi);
      else
        next = s + (phi > 0.0 ? 1.0 : -1.0) * std::min(std::abs(phi / tsum), 50.0);
    }
    if (next == s) break;
    s = next;
  }

  out.marginal = std::exp(s);
  double value = 0.0;
  for (int m = 0; m < m_count; ++m) value += v[m] * utilities[m].value(out.alloc[m]);
  out.value = value;
  return out;
}

RepresentativeDerivs second_derivatives(const RepresentativeEval& eval, const Eigen::VectorXd& v) {
  const Eigen::Index m_count = v.size();
  const Eigen::VectorXd& t = eval.tolerances;
  const double big_t = t.sum();
  const double y = eval.marginal;

  RepresentativeDerivs d;
  d.r_x = y;
  d.r_xx = -y / big_t;
  d.dalloc_dx = t / big_t;
  d.r_vx.resize(m_count);
  d.r_vv.resize(m_count, m_count);
  d.dalloc_dv.resize(m_count, m_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    d.r_vx[m] = y * t[m] / (big_t * v[m]);
    for (Eigen::Index l = 0; l < m_count; ++l) {
      const double delta = (l == m) ? 1.0 : 0.0;
      d.r_vv(l, m) = y * t[l] * (delta - t[m] / big_t) / (v[l] * v[m]);
      d.dalloc_dv(m, l) = t[m] * (delta - t[l] / big_t) / v[l];
    }
  }
  d.weight_metric = t.asDiagonal();
  return d;
}

RepresentativeDerivs second_derivatives(std::span<const ExpMixtureUtility> utilities,
                                        const Eigen::VectorXd& v, double x) {
  return second_derivatives(eval_representative(utilities, v, x), v);
}

}  // namespace mip
