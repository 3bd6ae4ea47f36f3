#pragma once

#include <span>

#include "mip/utility.hpp"

namespace mip {

// Optimal split of a total cash amount x across the makers under weights v:
//
//   r(v, x) = max { sum_m v_m u_m(x_m) : sum_m x_m = x }.
//
// At the optimum every maker's weighted marginal utility equals the common
// value y = dr/dx, and the split is recovered from the inverse marginals.
struct RepresentativeEval {
  double value;                // r(v, x)
  double marginal;             // dr/dx, strictly positive
  Eigen::VectorXd alloc;       // optimal split, sums to x
  Eigen::VectorXd tolerances;  // each maker's risk tolerance at its share
  int iterations;              // scalar root-find iterations spent
};

RepresentativeEval eval_representative(std::span<const ExpMixtureUtility> utilities,
                                       const Eigen::VectorXd& v, double x);

// Second-order data at the optimum.  Everything reduces to the per-maker
// tolerances t_m and their sum T:
//
//   d2r/dx2           = -r_x / T
//   v_m d2r/dv_m dx   =  r_x t_m / T
//   v_l v_m d2r/dv dv =  r_x t_l (delta_lm - t_m / T)
//   d alloc_m / dx    =  t_m / T
//   v_l d alloc_m/dv_l = t_m (delta_lm - t_l / T)
//
// The weight metric of r (weight curvature normalized by marginal value and
// with the cross term against x projected out) is exactly diag(t_m).
struct RepresentativeDerivs {
  double r_x;
  double r_xx;
  Eigen::VectorXd r_vx;        // d2r/dv_m dx
  Eigen::MatrixXd r_vv;        // d2r/dv_l dv_m
  Eigen::VectorXd dalloc_dx;   // sums to 1
  Eigen::MatrixXd dalloc_dv;   // (m, l) = d alloc_m / d v_l, columns sum to 0
  Eigen::MatrixXd weight_metric;  // diag(tolerances)
};

RepresentativeDerivs second_derivatives(const RepresentativeEval& eval, const Eigen::VectorXd& v);

RepresentativeDerivs second_derivatives(std::span<const ExpMixtureUtility> utilities,
                                        const Eigen::VectorXd& v, double x);

}  // namespace mip
