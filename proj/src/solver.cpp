#include "mip/solver.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

namespace mip {

namespace {

struct Targets {
  Eigen::VectorXd u;
  double y;
  Eigen::VectorXd q;
};

// Scaled residual of the saddle system at the current field derivatives.
Eigen::VectorXd residual(const FieldDerivatives& f, const Targets& t,
                         const Eigen::VectorXd& scales) {
  const Eigen::Index m_count = t.u.size();
  Eigen::VectorXd r(m_count + 1);
  for (Eigen::Index m = 0; m < m_count; ++m) r[m] = (f.grad_v[m] - t.u[m]) / scales[m];
  r[m_count] = (f.grad_x - t.y) / scales[m_count];
  return r;
}

void validate_targets(const ScenarioSpace& space, const Eigen::VectorXd& u, double y,
                      const Eigen::VectorXd& q) {
  if (u.size() != space.m_makers)
    throw ValidationError("utility target length does not match the maker count");
  for (Eigen::Index m = 0; m < u.size(); ++m)
    if (!(u[m] < 0.0) || !std::isfinite(u[m]))
      throw ValidationError("utility targets must be strictly negative and finite");
  if (!(y > 0.0) || !std::isfinite(y))
    throw ValidationError("marginal-value target must be strictly positive and finite");
  if (q.size() != space.j_claims)
    throw ValidationError("order vector length does not match the security count");
  for (Eigen::Index j = 0; j < q.size(); ++j)
    if (!std::isfinite(q[j])) throw ValidationError("order entries must be finite");
}

}  // namespace

SaddleResult solve_saddle(const ScenarioSpace& space,
                          std::span<const ExpMixtureUtility> utilities,
                          const InitialState& initial, const Eigen::VectorXd& u_target,
                          double y_target, const Eigen::VectorXd& q,
                          const SolveOptions& opts, const SaddleStart* warm) {
  validate_targets(space, u_target, y_target, q);
  const int m_count = space.m_makers;

  // Anchor at the initial book (or at a caller-provided warm point): there
  // the gradients themselves are the anchor targets, so continuation starts
  // from an exact solution and walks the targets to the requested ones
  // (u linear, ln y linear, q linear).
  const Eigen::VectorXd v_anchor = warm ? warm->v : initial.lambda0;
  const Eigen::VectorXd q_anchor =
      warm ? warm->q : Eigen::VectorXd::Zero(space.j_claims).eval();
  Eigen::VectorXd s = v_anchor.array().log();
  double x = warm ? warm->x : 0.0;
  ParetoPoint point = eval_point(space, utilities, initial.sigma0, v_anchor, x, q_anchor);
  FieldDerivatives field = field_derivatives(space, point);

  const Eigen::VectorXd u_anchor = field.grad_v;
  const double ln_y_anchor = std::log(field.grad_x);
  const double ln_y_goal = std::log(y_target);

  auto targets_at = [&](double t) {
    Targets tg;
    tg.u = u_anchor + t * (u_target - u_anchor);
    tg.y = std::exp(ln_y_anchor + t * (ln_y_goal - ln_y_anchor));
    tg.q = q_anchor + t * (q - q_anchor);
    return tg;
  };

  SolveDiagnostics diag;

  // One damped Newton run at fixed targets; returns false if the residual
  // cannot be pushed below tolerance from the current iterate.
  auto newton = [&](const Targets& tg, int max_steps) {
    Eigen::VectorXd scales(m_count + 1);
    for (int m = 0; m < m_count; ++m) scales[m] = std::max(1.0, std::abs(tg.u[m]));
    scales[m_count] = std::max(1.0, tg.y);

    Eigen::VectorXd s_cur = s;
    double x_cur = x;
    ParetoPoint p_cur = eval_point(space, utilities, initial.sigma0,
                                   s_cur.array().exp().matrix(), x_cur, tg.q);
    FieldDerivatives f_cur = field_derivatives(space, p_cur);
    Eigen::VectorXd r = residual(f_cur, tg, scales);
    double rnorm = r.cwiseAbs().maxCoeff();

    for (int it = 0; it < max_steps && rnorm > opts.tol; ++it) {
      ++diag.iterations;
      // Jacobian of the scaled residual in (ln v, x).
      Eigen::MatrixXd jac(m_count + 1, m_count + 1);
      const Eigen::VectorXd v = s_cur.array().exp();
      for (int m = 0; m < m_count; ++m) {
        for (int l = 0; l < m_count; ++l) jac(m, l) = v[l] * f_cur.d2_vv(m, l) / scales[m];
        jac(m, m_count) = f_cur.d2_vx[m] / scales[m];
        jac(m_count, m) = v[m] * f_cur.d2_vx[m] / scales[m_count];
      }
      jac(m_count, m_count) = f_cur.d2_xx / scales[m_count];

      Eigen::VectorXd step = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-r);
      if (!step.allFinite()) return false;
      const double len = step.cwiseAbs().maxCoeff();
      if (len > 10.0) step *= 10.0 / len;

      // Step halving until the residual norm drops.
      double alpha = 1.0;
      bool accepted = false;
      for (int h = 0; h < 30; ++h) {
        const Eigen::VectorXd s_try = s_cur + alpha * step.head(m_count);
        const double x_try = x_cur + alpha * step[m_count];
        ParetoPoint p_try = eval_point(space, utilities, initial.sigma0,
                                       s_try.array().exp().matrix(), x_try, tg.q);
        FieldDerivatives f_try = field_derivatives(space, p_try);
        const Eigen::VectorXd r_try = residual(f_try, tg, scales);
        const double rnorm_try = r_try.cwiseAbs().maxCoeff();
        if (rnorm_try < rnorm) {
          s_cur = s_try;
          x_cur = x_try;
          p_cur = std::move(p_try);
          f_cur = std::move(f_try);
          r = r_try;
          rnorm = rnorm_try;
          accepted = true;
          break;
        }
        alpha *= 0.5;
        ++diag.halvings;
      }
      if (!accepted) return false;
    }
    if (rnorm > opts.tol) return false;
    s = s_cur;
    x = x_cur;
    point = std::move(p_cur);
    field = std::move(f_cur);
    diag.residual = rnorm;
    return true;
  };

  double t = 0.0;
  double step = 1.0;
  int attempts = 0;
  while (t < 1.0) {
    if (++attempts > opts.max_stages)
      throw SolverError("saddle solve exceeded the continuation budget", diag.residual,
                        diag.iterations);
    const double t_try = std::min(1.0, t + step);
    const Eigen::VectorXd s_back = s;
    const double x_back = x;
    if (newton(targets_at(t_try), opts.max_newton)) {
      t = t_try;
      ++diag.stages;
      step = std::min(step * 1.3, 1.0);
    } else {
      s = s_back;
      x = x_back;
      step *= 0.5;
      if (step < 1e-9)
        throw SolverError("saddle continuation stalled", diag.residual, diag.iterations);
    }
  }

  // Polish: a few more full Newton steps cut the residual towards machine
  // precision, which the finite-difference audits lean on.
  {
    const Targets tg = targets_at(1.0);
    Eigen::VectorXd scales(m_count + 1);
    for (int m = 0; m < m_count; ++m) scales[m] = std::max(1.0, std::abs(tg.u[m]));
    scales[m_count] = std::max(1.0, tg.y);
    for (int polish = 0; polish < 3; ++polish) {
      Eigen::VectorXd r = residual(field, tg, scales);
      const double rnorm = r.cwiseAbs().maxCoeff();
      if (rnorm == 0.0) break;
      Eigen::MatrixXd jac(m_count + 1, m_count + 1);
      const Eigen::VectorXd v = s.array().exp();
      for (int m = 0; m < m_count; ++m) {
        for (int l = 0; l < m_count; ++l) jac(m, l) = v[l] * field.d2_vv(m, l) / scales[m];
        jac(m, m_count) = field.d2_vx[m] / scales[m];
        jac(m_count, m) = v[m] * field.d2_vx[m] / scales[m_count];
      }
      jac(m_count, m_count) = field.d2_xx / scales[m_count];
      const Eigen::VectorXd delta = Eigen::PartialPivLU<Eigen::MatrixXd>(jac).solve(-r);
      if (!delta.allFinite()) break;
      const Eigen::VectorXd s_try = s + delta.head(m_count);
      const double x_try = x + delta[m_count];
      ParetoPoint p_try = eval_point(space, utilities, initial.sigma0,
                                     s_try.array().exp().matrix(), x_try, tg.q);
      FieldDerivatives f_try = field_derivatives(space, p_try);
      const double rnorm_try = residual(f_try, tg, scales).cwiseAbs().maxCoeff();
      if (rnorm_try >= rnorm) break;
      s = s_try;
      x = x_try;
      point = std::move(p_try);
      field = std::move(f_try);
      diag.residual = rnorm_try;
      ++diag.iterations;
    }
  }

  SaddleResult out;
  out.v = s.array().exp();
  out.x = x;
  out.point = std::move(point);
  out.field = std::move(field);
  out.diagnostics = diag;
  return out;
}

IndifferenceResult solve_indifference(const ScenarioSpace& space,
                                      std::span<const ExpMixtureUtility> utilities,
                                      const InitialState& initial, const Eigen::VectorXd& q,
                                      const SolveOptions& opts, const SaddleStart* warm) {
  SaddleResult saddle = solve_saddle(space, utilities, initial, initial.u0, 1.0, q, opts, warm);
  IndifferenceResult out;
  out.q = q;
  out.x = saddle.x;
  out.v_raw = saddle.v;
  out.w = saddle.v / saddle.v.sum();
  out.scale_y = 1.0;
  out.u0 = initial.u0;
  out.alloc1 = saddle.point.alloc;
  out.point = std::move(saddle.point);
  out.field = std::move(saddle.field);
  out.diagnostics = saddle.diagnostics;
  return out;
}

double collective_cash(const ScenarioSpace& space,
                       std::span<const ExpMixtureUtility> utilities,
                       const InitialState& initial, const Eigen::VectorXd& u, double y,
                       const Eigen::VectorXd& q, const SolveOptions& opts) {
  const SaddleResult saddle = solve_saddle(space, utilities, initial, u, y, q, opts);
  return saddle.x * y;
}

ImpactReport impact_report(const ScenarioSpace& space, const IndifferenceResult& solved) {
  ImpactReport rep;
  rep.q = solved.q;
  rep.x = solved.x;
  rep.w = solved.w;
  rep.A = solved.field.A;
  rep.C = solved.field.C;
  rep.D = solved.field.D;

  // A is symmetric positive definite (spectrum inside the aversion
  // envelope), so a Cholesky solve is safe.
  Eigen::LDLT<Eigen::MatrixXd> a_fact(rep.A);
  rep.E = -a_fact.solve(rep.C);
  rep.H = rep.D - rep.C.transpose() * rep.E;

  const int m_count = space.m_makers;
  const int j_claims = space.j_claims;
  rep.Z.resize(m_count, j_claims);
  const Eigen::RowVectorXd mean = solved.w.transpose() * rep.E;
  for (int m = 0; m < m_count; ++m) rep.Z.row(m) = rep.E.row(m) - mean;

  rep.gradient.resize(j_claims);
  for (int j = 0; j < j_claims; ++j)
    rep.gradient[j] = -expectation(
        space.probs, solved.point.pricing_density.cwiseProduct(space.payoffs.col(j)));

  rep.probs = space.probs;
  rep.payoffs = space.payoffs;
  rep.pricing_density = solved.point.pricing_density;
  rep.second_density = solved.point.second_density;
  rep.total_tolerance = solved.point.total_tolerance;
  rep.shares = solved.point.shares;
  rep.base_tolerance = solved.point.base_tolerance;
  return rep;
}

ImpactExpansion ImpactReport::expansion_terms(const Eigen::VectorXd& dq) const {
  const int n = static_cast<int>(probs.size());
  const int m_count = static_cast<int>(shares.rows());

  ImpactExpansion e;
  e.linear = gradient.dot(dq);

  const Eigen::VectorXd z = Z * dq;
  const Eigen::VectorXd pay = payoffs * dq;

  // Per-state variance of z under the tolerance shares, weighted by the
  // squared measure change dQ/dR = R1/R0.
  Eigen::VectorXd var_term(n);
  for (int w = 0; w < n; ++w) {
    double first = 0.0, second = 0.0;
    for (int m = 0; m < m_count; ++m) {
      const double rho = shares(m, w);
      first += rho * z[m] * z[m];
      second += rho * z[m];
    }
    const double ratio = total_tolerance[w] / base_tolerance;
    var_term[w] = ratio * ratio * (first - second * second);
  }
  auto ex_r = [&](const Eigen::VectorXd& vals) {
    return expectation(probs, second_density.cwiseProduct(vals));
  };
  e.quad_tolerance = 0.5 * base_tolerance * ex_r(var_term);

  const Eigen::VectorXd ratio = total_tolerance / base_tolerance;
  const double cov =
      ex_r(ratio.cwiseProduct(pay)) - ex_r(ratio) * ex_r(pay);
  e.quad_covariance = cov * cov / (2.0 * base_tolerance);

  const double mean_pay = ex_r(pay);
  e.quad_variance =
      (ex_r(pay.cwiseProduct(pay)) - mean_pay * mean_pay) / (2.0 * base_tolerance);
  return e;
}

WeightTermDiagnostics weight_term_diagnostics(const ImpactReport& report,
                                              const Eigen::VectorXd& r_dir) {
  WeightTermDiagnostics d;
  const int n = static_cast<int>(report.probs.size());
  const int m_count = static_cast<int>(report.shares.rows());

  const Eigen::VectorXd z = report.Z * r_dir;
  d.weight_response = z.cwiseAbs().maxCoeff();

  Eigen::VectorXd var_term(n);
  for (int w = 0; w < n; ++w) {
    double first = 0.0, second = 0.0;
    for (int m = 0; m < m_count; ++m) {
      const double rho = report.shares(m, w);
      first += rho * z[m] * z[m];
      second += rho * z[m];
    }
    const double ratio = report.total_tolerance[w] / report.base_tolerance;
    var_term[w] = ratio * ratio * (first - second * second);
  }
  d.variance_term = expectation(report.probs, report.second_density.cwiseProduct(var_term));

  // Tilt the pricing measure by each maker's tolerance share and compare the
  // price it assigns to <r, psi> with the untilted one.
  const Eigen::VectorXd pay = report.payoffs * r_dir;
  auto ex_q = [&](const Eigen::VectorXd& vals) {
    return expectation(report.probs, report.pricing_density.cwiseProduct(vals));
  };
  const double base_price = ex_q(pay);
  d.measure_gap = 0.0;
  for (int m = 0; m < m_count; ++m) {
    const Eigen::VectorXd rho = report.shares.row(m).transpose();
    const double tilted = ex_q(rho.cwiseProduct(pay)) / ex_q(rho);
    d.measure_gap = std::max(d.measure_gap, std::abs(tilted - base_price));
  }

  constexpr double kVanish = 1e-9;
  d.variance_vanishes = d.variance_term <= kVanish;
  d.response_vanishes = d.weight_response <= kVanish;
  d.measures_agree = d.measure_gap <= kVanish;
  d.consistent = (d.variance_vanishes == d.response_vanishes) &&
                 (d.response_vanishes == d.measures_agree);
  return d;
}

ExpansionResidual expansion_residual(const ScenarioSpace& space,
                                     std::span<const ExpMixtureUtility> utilities,
                                     const InitialState& initial, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& dq, const SolveOptions& opts) {
  const IndifferenceResult base = solve_indifference(space, utilities, initial, q, opts);
  const IndifferenceResult bumped = solve_indifference(space, utilities, initial, q + dq, opts);
  const ImpactReport rep = impact_report(space, base);
  ExpansionResidual out;
  out.actual = bumped.x - base.x;
  out.predicted = rep.expansion_terms(dq).predicted();
  out.residual = out.actual - out.predicted;
  return out;
}

}  // namespace mip
