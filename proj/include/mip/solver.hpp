#pragma once

#include <span>

#include "mip/pareto_field.hpp"

namespace mip {

struct SolveOptions {
  double tol = 1e-11;   // scaled residual infinity norm
  int max_newton = 50;  // Newton steps per continuation stage
  int max_stages = 30;  // continuation stages
};

struct SolveDiagnostics {
  int iterations = 0;  // Newton steps over all stages
  int stages = 0;      // accepted continuation stages
  int halvings = 0;    // damping halvings over all steps
  double residual = 0.0;
};

// Solution of the saddle system dF/dv_m = u_m (all m), dF/dx = y at order q.
struct SaddleResult {
  Eigen::VectorXd v;
  double x = 0.0;
  ParetoPoint point;
  FieldDerivatives field;
  SolveDiagnostics diagnostics;
};

// Optional warm start: a previously solved point whose gradients seed the
// continuation path instead of the initial book.
struct SaddleStart {
  Eigen::VectorXd v;
  double x = 0.0;
  Eigen::VectorXd q;
};

// Newton in (ln v, x) with exact second derivatives, step-halving damping on
// the residual norm, and continuation from the initial book (where the
// solution is known in closed form) towards the requested targets.
SaddleResult solve_saddle(const ScenarioSpace& space,
                          std::span<const ExpMixtureUtility> utilities,
                          const InitialState& initial, const Eigen::VectorXd& u_target,
                          double y_target, const Eigen::VectorXd& q,
                          const SolveOptions& opts = {}, const SaddleStart* warm = nullptr);

// Market indifference price of the order q: the cash x(q) that, together
// with q, leaves every maker's expected utility at its initial level.  The
// weights w are the post-trade Pareto weights, normalized to the simplex;
// v_raw carries the scale pinned by dF/dx = 1.
struct IndifferenceResult {
  Eigen::VectorXd q;
  double x = 0.0;
  Eigen::VectorXd w;
  Eigen::VectorXd v_raw;
  double scale_y = 1.0;
  Eigen::VectorXd u0;
  Eigen::MatrixXd alloc1;  // M x N post-trade allocation
  ParetoPoint point;
  FieldDerivatives field;
  SolveDiagnostics diagnostics;
};

IndifferenceResult solve_indifference(const ScenarioSpace& space,
                                      std::span<const ExpMixtureUtility> utilities,
                                      const InitialState& initial, const Eigen::VectorXd& q,
                                      const SolveOptions& opts = {},
                                      const SaddleStart* warm = nullptr);

// Collective cash the makers hold when their indirect utilities are u and
// they own q, at marginal-value scale y: the saddle value x * y.  Positively
// homogeneous of degree one in y.
double collective_cash(const ScenarioSpace& space,
                       std::span<const ExpMixtureUtility> utilities,
                       const InitialState& initial, const Eigen::VectorXd& u, double y,
                       const Eigen::VectorXd& q, const SolveOptions& opts = {});

// Three-part split of the second-order price change for a further order dq:
//   linear          -E_Q[<dq, psi>]
//   quad_tolerance  (R0/2) E_R[(dQ/dR)^2 Var_rho(Z dq)]   weight reshuffle
//   quad_covariance (1/2R0) Cov_R(dQ/dR, <dq, psi>)^2     tolerance-payoff
//   quad_variance   (1/2R0) Var_R[<dq, psi>]              payoff variance
// The three quadratic parts are each nonnegative and sum to <dq, H dq>/2.
struct ImpactExpansion {
  double linear = 0.0;
  double quad_tolerance = 0.0;
  double quad_covariance = 0.0;
  double quad_variance = 0.0;
  double predicted() const {
    return linear + quad_tolerance + quad_covariance + quad_variance;
  }
};

// Price sensitivities at a solved point.  gradient is the first-order price
// of the order flow; H its Hessian; E and Z the weight responses; A, C, D the
// normalized second-derivative blocks they are built from.
struct ImpactReport {
  Eigen::VectorXd q;
  double x = 0.0;
  Eigen::VectorXd w;
  Eigen::VectorXd gradient;  // J: -E_Q[psi]
  Eigen::MatrixXd A, C, D;
  Eigen::MatrixXd E;         // M x J: -A^{-1} C, relative weight response
  Eigen::MatrixXd H;         // J x J: C^T A^{-1} C + D, price Hessian
  Eigen::MatrixXd Z;         // M x J: E re-centered to the simplex tangent

  // Per-state data retained so expansions and diagnostics stand alone.
  Eigen::VectorXd probs;
  Eigen::MatrixXd payoffs;
  Eigen::VectorXd pricing_density;
  Eigen::VectorXd second_density;
  Eigen::VectorXd total_tolerance;
  Eigen::MatrixXd shares;
  double base_tolerance = 0.0;

  ImpactExpansion expansion_terms(const Eigen::VectorXd& dq) const;
};

ImpactReport impact_report(const ScenarioSpace& space, const IndifferenceResult& solved);

// The weight-reshuffle quadratic term vanishes along a direction r exactly
// when the weights do not move along r, which happens exactly when every
// maker's tolerance-tilted measure prices <r, psi> like Q does.  The three
// characterizations are computed independently; agreement of their verdicts
// (threshold 1e-9) is a consistency check on the whole second-order layer.
struct WeightTermDiagnostics {
  double variance_term = 0.0;    // E_R[(dQ/dR)^2 Var_rho(Z r)]
  double weight_response = 0.0;  // |Z r|_inf
  double measure_gap = 0.0;      // max_m |E_{R_m}[<r,psi>] - E_Q[<r,psi>]|
  bool variance_vanishes = false;
  bool response_vanishes = false;
  bool measures_agree = false;
  bool consistent = false;  // all three verdicts equal
};

WeightTermDiagnostics weight_term_diagnostics(const ImpactReport& report,
                                              const Eigen::VectorXd& r_dir);

// Difference between the true price change x(q + dq) - x(q) and its
// second-order prediction from the impact report at q.
struct ExpansionResidual {
  double actual = 0.0;
  double predicted = 0.0;
  double residual = 0.0;
};

ExpansionResidual expansion_residual(const ScenarioSpace& space,
                                     std::span<const ExpMixtureUtility> utilities,
                                     const InitialState& initial, const Eigen::VectorXd& q,
                                     const Eigen::VectorXd& dq, const SolveOptions& opts = {});

}  // namespace mip
