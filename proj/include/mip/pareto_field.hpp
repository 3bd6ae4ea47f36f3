#pragma once

#include <span>

#include "mip/scenario.hpp"

namespace mip {

// State-by-state data of the Pareto-optimal allocation attached to the
// parameter a = (v, x, q): weights v, extra cash x, security position q held
// by the makers on top of the initial endowment sigma0.
//
// Per state the total sigma0 + x + <q, psi> is split efficiently under v.
// The common weighted marginal utility y defines the pricing density
// dQ/dP = y / E[y]; the curvature d2r/dx2 = -y / R1 (with R1 the summed risk
// tolerances of the split) defines the second-order density dR/dP.  The base
// tolerance R0 = -E[y] / E[d2r/dx2] makes E_R[R1] = R0 a martingale identity.
struct ParetoPoint {
  Eigen::VectorXd v;
  double x = 0.0;
  Eigen::VectorXd q;

  Eigen::VectorXd total;            // N: per-state total cash to split
  Eigen::MatrixXd alloc;            // M x N: efficient split
  Eigen::MatrixXd util_values;      // M x N: u_m at the split
  Eigen::VectorXd value;            // N: weighted utility of the split
  Eigen::VectorXd marginal;         // N: y, common weighted marginal utility
  Eigen::VectorXd curvature;        // N: d2r/dx2 = -y / R1
  Eigen::MatrixXd tolerances;       // M x N: per-maker risk tolerances
  Eigen::VectorXd total_tolerance;  // N: R1, column sums of tolerances
  Eigen::MatrixXd shares;           // M x N: rho, tolerances / R1
  Eigen::VectorXd pricing_density;  // N: dQ/dP
  Eigen::VectorXd second_density;   // N: dR/dP
  double base_tolerance = 0.0;      // R0
};

ParetoPoint eval_point(const ScenarioSpace& space,
                       std::span<const ExpMixtureUtility> utilities,
                       const Eigen::VectorXd& sigma0, const Eigen::VectorXd& v, double x,
                       const Eigen::VectorXd& q);

// Expected indirect utility F(v, x, q) = E[r(v, total)] with its full first
// and second derivative blocks, plus the three normalized impact matrices:
//
//   A: weight metric      (M x M)  (1/R0) (E_R[tau_l (delta_lm R1 - tau_m)]
//                                          + E_R[tau_l] E_R[tau_m])
//   C: weight-payoff      (M x J)  (1/R0) Cov_R(tau_m, psi_j)
//   D: payoff metric      (J x J)  (1/R0) Cov_R(psi_i, psi_j)
//
// A is symmetric positive definite with spectrum inside the economy's
// aversion envelope [1/c, c]; C and D vanish exactly when the tolerances and
// payoffs carry no cross-state variation under R.
struct FieldDerivatives {
  double value = 0.0;
  Eigen::VectorXd grad_v;  // M: expected utility of each maker's share
  double grad_x = 0.0;     // E[y] > 0
  Eigen::VectorXd grad_q;  // J: grad_x * E_Q[psi]

  Eigen::MatrixXd d2_vv;   // M x M
  Eigen::VectorXd d2_vx;   // M
  double d2_xx = 0.0;      // E[d2r/dx2] < 0
  Eigen::MatrixXd d2_vq;   // M x J
  Eigen::VectorXd d2_xq;   // J
  Eigen::MatrixXd d2_qq;   // J x J

  Eigen::MatrixXd A;       // M x M
  Eigen::MatrixXd C;       // M x J
  Eigen::MatrixXd D;       // J x J
};

FieldDerivatives field_derivatives(const ScenarioSpace& space, const ParetoPoint& point);

// Grid of parameter points swept by the property checks.
struct PropertyGrid {
  std::vector<Eigen::VectorXd> v_points;
  std::vector<double> x_points;
  std::vector<Eigen::VectorXd> q_points;

  static PropertyGrid defaults(int m_makers, int j_claims);
};

// Sweeps the grid and checks the shape properties of F: positive homogeneity
// in v, monotonicity and strict concavity in x, the marginal-utility bounds
// tying grad_v and d2_vx to grad_x and d2_xx, the spectrum of A, and the
// positive-semidefinite split of A into its variance and outer parts.
// Boundary behaviour (value -> 0, summed weight derivatives -> -inf as a
// weight dies out) is reported as a monotone-trend item.
CheckReport check_F_space_properties(const ScenarioSpace& space,
                                     std::span<const ExpMixtureUtility> utilities,
                                     const Eigen::VectorXd& sigma0, double risk_bound,
                                     const PropertyGrid& grid);

}  // namespace mip
