#pragma once

#include <functional>
#include <span>

#include <nlohmann/json_fwd.hpp>

#include "mip/solver.hpp"

namespace mip::verify {

// Central difference with one Richardson extrapolation step.  error is the
// difference between the extrapolated and the finer plain estimate, a usable
// upper bound on the truncation error in well-behaved cases.
struct FdValue {
  double value = 0.0;
  double error = 0.0;
};

FdValue fd_derivative(const std::function<double(double)>& f, double x, double step);

// Per-coordinate Richardson central differences, step scaled by max(1, |x_i|).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step = 1e-4);

// Jacobian of a vector map by the same stencil; symmetrize to estimate a
// Hessian from an exact gradient.
Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step = 1e-4);

// Closed-form indifference price available when every maker has a one-term
// exponential utility: with T the summed risk tolerances, the weights never
// move and
//
//   x(q) = T ln( E[exp(-(sigma0 + <q,psi>) / T)] / E[exp(-sigma0 / T)] ).
//
// Completely independent of the Newton path, which makes it the oracle for
// the solver tests.
double exp_closed_form_price(const ScenarioSpace& space, const Eigen::VectorXd& sigma0,
                             double aggregate_tolerance, const Eigen::VectorXd& q);

// Validating wrapper: rejects economies with any multi-term maker.
double exp_closed_form_price(const ScenarioSpace& space,
                             std::span<const ExpMixtureUtility> utilities,
                             const Eigen::VectorXd& sigma0, const Eigen::VectorXd& q);

// Coarse-to-fine grid search for the saddle of
//
//   L(v, x) = <u, v> + x y - F(v, x)
//
// over v = scale * w (w on the simplex, scale log-spaced) and x, with the
// inner minimum over x refined by golden section.  sup_inf and inf_sup are
// both evaluated on the same final product grid; their gap shrinks with the
// grid pitch.  Intended for tiny instances (at most three makers).
struct SaddleGridSpec {
  int weight_points = 9;
  double weight_floor = 0.02;
  double scale_lo = 0.05;
  double scale_hi = 20.0;
  int scale_points = 13;
  double x_lo = -8.0;
  double x_hi = 8.0;
  int x_points = 33;
  int refine_levels = 3;
};

struct BruteForceResult {
  Eigen::VectorXd v;
  double x = 0.0;
  double value = 0.0;    // saddle value at (v, x)
  double sup_inf = 0.0;  // max over v of min over x, on the final grid
  double inf_sup = 0.0;  // min over x of max over v, on the final grid
  double pitch_x = 0.0;
  double pitch_w = 0.0;
  double pitch_scale = 0.0;  // in ln scale units
};

BruteForceResult brute_force_saddle(
    const std::function<double(const Eigen::VectorXd&, double)>& field_value,
    const Eigen::VectorXd& u, double y, const SaddleGridSpec& grid = {});

// Cross-checks the saddle transform against the field derivatives at a grid
// of conjugate pairs: value identities, the envelope identity for the order
// gradient, inversion of the weight metric, the weight response and order
// Hessian, dual homogeneity in y, and the aversion-envelope bounds on both
// sides of the transform.  Derivatives of the transform are taken by finite
// differences of full solves.
struct BatteryOptions {
  double fd_step = 1e-3;
  double fd_tol = 1e-5;        // second-order identities via FD
  double envelope_tol = 1e-6;  // first-order identities via FD
  double algebra_tol = 1e-9;   // identities with both sides in closed form
};

CheckReport conjugacy_battery(const ScenarioSpace& space,
                              std::span<const ExpMixtureUtility> utilities,
                              const InitialState& initial, const BatteryOptions& opts = {});

nlohmann::json report_to_json(const CheckReport& report);

}  // namespace mip::verify
