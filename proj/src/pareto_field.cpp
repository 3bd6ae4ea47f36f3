#include "mip/pareto_field.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "mip/representative.hpp"

namespace mip {

ParetoPoint eval_point(const ScenarioSpace& space,
                       std::span<const ExpMixtureUtility> utilities,
                       const Eigen::VectorXd& sigma0, const Eigen::VectorXd& v, double x,
                       const Eigen::VectorXd& q) {
  const int n = space.n_states;
  const int m_count = space.m_makers;
  if (static_cast<int>(utilities.size()) != m_count)
    throw ValidationError("utility list does not match the scenario's maker count");
  if (sigma0.size() != n) throw ValidationError("sigma0 length does not match the state count");
  if (q.size() != space.j_claims)
    throw ValidationError("order vector length does not match the security count");

  ParetoPoint p;
  p.v = v;
  p.x = x;
  p.q = q;
  p.total = (sigma0.array() + x).matrix() + space.payoffs * q;

  p.alloc.resize(m_count, n);
  p.util_values.resize(m_count, n);
  p.value.resize(n);
  p.marginal.resize(n);
  p.curvature.resize(n);
  p.tolerances.resize(m_count, n);
  p.total_tolerance.resize(n);
  p.shares.resize(m_count, n);

  for (int w = 0; w < n; ++w) {
    const RepresentativeEval r = eval_representative(utilities, v, p.total[w]);
    p.alloc.col(w) = r.alloc;
    p.tolerances.col(w) = r.tolerances;
    p.marginal[w] = r.marginal;
    p.value[w] = r.value;
    const double r1 = r.tolerances.sum();
    p.total_tolerance[w] = r1;
    p.curvature[w] = -r.marginal / r1;
    p.shares.col(w) = r.tolerances / r1;
    for (int m = 0; m < m_count; ++m)
      p.util_values(m, w) = utilities[m].value(r.alloc[m]);
  }

  const double mean_marginal = expectation(space.probs, p.marginal);
  const double mean_curvature = expectation(space.probs, p.curvature);
  p.pricing_density = p.marginal / mean_marginal;
  p.second_density = p.curvature / mean_curvature;
  p.base_tolerance = -mean_marginal / mean_curvature;
  return p;
}

FieldDerivatives field_derivatives(const ScenarioSpace& space, const ParetoPoint& p) {
  const int n = space.n_states;
  const int m_count = static_cast<int>(p.v.size());
  const int j_claims = space.j_claims;
  const Eigen::VectorXd& probs = space.probs;

  auto ex = [&](const Eigen::VectorXd& vals) { return expectation(probs, vals); };

  FieldDerivatives f;
  f.value = ex(p.value);
  f.grad_x = ex(p.marginal);
  f.d2_xx = ex(p.curvature);

  f.grad_v.resize(m_count);
  for (int m = 0; m < m_count; ++m) f.grad_v[m] = ex(p.util_values.row(m).transpose());

  f.grad_q.resize(j_claims);
  f.d2_xq.resize(j_claims);
  for (int j = 0; j < j_claims; ++j) {
    f.grad_q[j] = ex(p.marginal.cwiseProduct(space.payoffs.col(j)));
    f.d2_xq[j] = ex(p.curvature.cwiseProduct(space.payoffs.col(j)));
  }

  // Second derivatives against the weights collapse to moments of the
  // per-state tolerances: with kappa the per-state curvature d2r/dx2,
  //   v_m    d2F/dv_m dx   = E[-kappa tau_m]
  //   v_l v_m d2F/dv_l dv_m = E[-kappa tau_l (delta_lm R1 - tau_m)]
  //   v_m    d2F/dv_m dq_j = E[-kappa tau_m psi_j]
  //   d2F/dx dq_j          = E[ kappa psi_j]
  //   d2F/dq_i dq_j        = E[ kappa psi_i psi_j].
  f.d2_vx.resize(m_count);
  f.d2_vv.resize(m_count, m_count);
  f.d2_vq.resize(m_count, j_claims);
  Eigen::VectorXd buf(n);
  for (int m = 0; m < m_count; ++m) {
    buf = -p.curvature.cwiseProduct(p.tolerances.row(m).transpose());
    f.d2_vx[m] = ex(buf) / p.v[m];
    for (int j = 0; j < j_claims; ++j)
      f.d2_vq(m, j) = ex(buf.cwiseProduct(space.payoffs.col(j))) / p.v[m];
  }
  for (int l = 0; l < m_count; ++l)
    for (int m = 0; m < m_count; ++m) {
      const Eigen::ArrayXd dl = p.tolerances.row(l).transpose().array();
      Eigen::ArrayXd inner = -p.tolerances.row(m).transpose().array();
      if (l == m) inner += p.total_tolerance.array();
      const Eigen::VectorXd term = (-p.curvature.array() * dl * inner).matrix();
      f.d2_vv(l, m) = ex(term) / (p.v[l] * p.v[m]);
    }

  f.d2_qq.resize(j_claims, j_claims);
  for (int i = 0; i < j_claims; ++i)
    for (int j = i; j < j_claims; ++j) {
      const double val =
          ex(p.curvature.cwiseProduct(space.payoffs.col(i)).cwiseProduct(space.payoffs.col(j)));
      f.d2_qq(i, j) = val;
      f.d2_qq(j, i) = val;
    }

  // Impact matrices as moments under the second-order density.
  auto ex_r = [&](const Eigen::VectorXd& vals) {
    return expectation(probs, p.second_density.cwiseProduct(vals));
  };
  const double r0 = p.base_tolerance;

  Eigen::VectorXd tau_mean(m_count);            // E_R[tau_m]
  Eigen::MatrixXd tau_cross(m_count, m_count);  // E_R[tau_l tau_m]
  for (int m = 0; m < m_count; ++m)
    tau_mean[m] = ex_r(p.tolerances.row(m).transpose());
  for (int l = 0; l < m_count; ++l)
    for (int m = l; m < m_count; ++m) {
      const double val = ex_r(
          p.tolerances.row(l).transpose().cwiseProduct(p.tolerances.row(m).transpose()));
      tau_cross(l, m) = val;
      tau_cross(m, l) = val;
    }
  f.A.resize(m_count, m_count);
  for (int l = 0; l < m_count; ++l) {
    const double row_sum = tau_cross.row(l).sum();  // E_R[tau_l R1]
    for (int m = 0; m < m_count; ++m) {
      const double delta = (l == m) ? row_sum : 0.0;
      f.A(l, m) = (delta - tau_cross(l, m) + tau_mean[l] * tau_mean[m]) / r0;
    }
  }

  Eigen::VectorXd psi_mean(j_claims);
  for (int j = 0; j < j_claims; ++j) psi_mean[j] = ex_r(space.payoffs.col(j));
  f.C.resize(m_count, j_claims);
  for (int m = 0; m < m_count; ++m)
    for (int j = 0; j < j_claims; ++j)
      f.C(m, j) =
          (ex_r(p.tolerances.row(m).transpose().cwiseProduct(space.payoffs.col(j))) -
           tau_mean[m] * psi_mean[j]) /
          r0;
  f.D.resize(j_claims, j_claims);
  for (int i = 0; i < j_claims; ++i)
    for (int j = i; j < j_claims; ++j) {
      const double val = (ex_r(space.payoffs.col(i).cwiseProduct(space.payoffs.col(j))) -
                          psi_mean[i] * psi_mean[j]) /
                         r0;
      f.D(i, j) = val;
      f.D(j, i) = val;
    }
  return f;
}

PropertyGrid PropertyGrid::defaults(int m_makers, int j_claims) {
  PropertyGrid g;
  const Eigen::VectorXd equal = Eigen::VectorXd::Constant(m_makers, 1.0 / m_makers);
  g.v_points.push_back(equal);
  if (m_makers > 1) {
    for (int m = 0; m < m_makers; ++m) {
      Eigen::VectorXd tilted = Eigen::VectorXd::Constant(m_makers, 0.4 / (m_makers - 1));
      tilted[m] = 0.6;
      g.v_points.push_back(tilted);
    }
  }
  g.x_points = {-2.0, 0.0, 2.0};
  if (std::pow(3.0, j_claims) <= 27.5) {
    // Full {-1, 0, 1}^J product for small J.
    const int total = static_cast<int>(std::pow(3.0, j_claims));
    for (int idx = 0; idx < total; ++idx) {
      Eigen::VectorXd q(j_claims);
      int rem = idx;
      for (int j = 0; j < j_claims; ++j) {
        q[j] = static_cast<double>(rem % 3 - 1);
        rem /= 3;
      }
      g.q_points.push_back(q);
    }
  } else {
    g.q_points.push_back(Eigen::VectorXd::Zero(j_claims));
    for (int j = 0; j < j_claims; ++j) {
      Eigen::VectorXd q = Eigen::VectorXd::Zero(j_claims);
      q[j] = 1.0;
      g.q_points.push_back(q);
      g.q_points.push_back(-q);
    }
  }
  return g;
}

CheckReport check_F_space_properties(const ScenarioSpace& space,
                                     std::span<const ExpMixtureUtility> utilities,
                                     const Eigen::VectorXd& sigma0, double risk_bound,
                                     const PropertyGrid& grid) {
  const double c = risk_bound;
  const int m_count = space.m_makers;

  double homogeneity_margin = 1e300;
  double monotone_margin = 1e300;
  double concavity_margin = 1e300;
  double marginal_bound_margin = 1e300;
  double cross_bound_margin = 1e300;
  double spectrum_margin = 1e300;
  double split_margin = 1e300;
  double payoff_grad_margin = 1e300;

  for (const auto& v : grid.v_points)
    for (double x : grid.x_points)
      for (const auto& q : grid.q_points) {
        const ParetoPoint p = eval_point(space, utilities, sigma0, v, x, q);
        const FieldDerivatives f = field_derivatives(space, p);

        const ParetoPoint p2 = eval_point(space, utilities, sigma0, 2.0 * v, x, q);
        const double f2 = expectation(space.probs, p2.value);
        homogeneity_margin = std::min(
            homogeneity_margin, 1e-12 - std::abs(f2 - 2.0 * f.value) / std::abs(f.value));

        monotone_margin = std::min(monotone_margin, f.grad_x);
        concavity_margin = std::min(concavity_margin, -f.d2_xx);

        // Relative margins: all-exponential economies attain the envelope
        // bounds exactly, so roundoff must not flip the verdict.
        for (int m = 0; m < m_count; ++m) {
          const double wm = -v[m] * f.grad_v[m];
          marginal_bound_margin =
              std::min({marginal_bound_margin, (wm - f.grad_x / c) / f.grad_x,
                        (c * f.grad_x - wm) / f.grad_x});
          const double cm = v[m] * f.d2_vx[m];
          cross_bound_margin =
              std::min({cross_bound_margin, (cm + f.d2_xx / c) / -f.d2_xx,
                        (-c * f.d2_xx - cm) / -f.d2_xx});
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(f.A);
        spectrum_margin = std::min({spectrum_margin,
                                    es.eigenvalues().minCoeff() - (1.0 / c - 1e-8),
                                    (c + 1e-8) - es.eigenvalues().maxCoeff()});

        // A splits into a centered part plus the outer product of
        // s = E_R[tau] / R0 scaled by R0; both halves must be PSD.
        Eigen::VectorXd s(m_count);
        for (int m = 0; m < m_count; ++m)
          s[m] = expectation(space.probs,
                             p.second_density.cwiseProduct(p.tolerances.row(m).transpose())) /
                 p.base_tolerance;
        Eigen::MatrixXd centered = f.A - p.base_tolerance * s * s.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es2(centered);
        split_margin = std::min(split_margin, es2.eigenvalues().minCoeff());

        Eigen::VectorXd eq_psi(space.j_claims);
        for (int j = 0; j < space.j_claims; ++j)
          eq_psi[j] =
              expectation(space.probs, p.pricing_density.cwiseProduct(space.payoffs.col(j)));
        const double payoff_err =
            (f.grad_q - f.grad_x * eq_psi).cwiseAbs().maxCoeff() / std::max(1.0, f.grad_x);
        payoff_grad_margin = std::min(payoff_grad_margin, 1e-10 - payoff_err);
      }

  CheckReport report;
  report.items.push_back({"weight_homogeneity", homogeneity_margin >= 0.0, homogeneity_margin,
                          "F(2v,x,q) = 2 F(v,x,q), relative"});
  report.items.push_back(
      {"increasing_in_cash", monotone_margin > 0.0, monotone_margin, "dF/dx > 0"});
  report.items.push_back(
      {"concave_in_cash", concavity_margin > 0.0, concavity_margin, "d2F/dx2 < 0"});
  report.items.push_back({"marginal_value_bounds", marginal_bound_margin >= -1e-9,
                          marginal_bound_margin, "-v_m dF/dv_m inside [1/c, c] dF/dx"});
  report.items.push_back({"cross_curvature_bounds", cross_bound_margin >= -1e-9,
                          cross_bound_margin, "v_m d2F/dv_m dx inside [1/c, c] |d2F/dx2|"});
  report.items.push_back({"weight_metric_spectrum", spectrum_margin >= 0.0, spectrum_margin,
                          "eigenvalues of A inside [1/c, c]"});
  report.items.push_back({"weight_metric_split_psd", split_margin >= -1e-10, split_margin,
                          "A minus its outer-product part stays PSD"});
  report.items.push_back({"payoff_gradient_consistency", payoff_grad_margin >= 0.0,
                          payoff_grad_margin, "dF/dq = dF/dx E_Q[psi]"});

  if (m_count > 1) {
    // Trend check: as the first weight dies out the field value climbs to 0,
    // the dying maker's value share vanishes and the summed weight
    // derivatives fall without bound.
    double prev_value = -1e300, prev_contrib = 1e300, prev_gradsum = 1e300;
    bool monotone = true;
    const double x = grid.x_points.front();
    const Eigen::VectorXd q = grid.q_points.front();
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
      Eigen::VectorXd v = Eigen::VectorXd::Constant(m_count, (1.0 - eps) / (m_count - 1));
      v[0] = eps;
      const ParetoPoint p = eval_point(space, utilities, sigma0, v, x, q);
      const FieldDerivatives f = field_derivatives(space, p);
      const double contrib = std::abs(v[0] * f.grad_v[0]);
      const double gradsum = f.grad_v.sum();
      monotone = monotone && f.value > prev_value && f.value < 0.0 &&
                 contrib < prev_contrib && gradsum < prev_gradsum;
      prev_value = f.value;
      prev_contrib = contrib;
      prev_gradsum = gradsum;
    }
    report.items.push_back({"boundary_trend", monotone, monotone ? 1.0 : -1.0,
                            "value -> 0, dying maker's share -> 0, sum dF/dv -> -inf"});
  }
  return report;
}

}  // namespace mip
