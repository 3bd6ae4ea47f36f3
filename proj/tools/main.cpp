// Command-line front end: price, curve, impact and check runs over scenario
// files, with JSON or CSV reports on stdout or --out.
//
// Sign convention: the order q and the cash x are acquired by the market
// makers.  An investor buying q from the makers leaves them holding -q, so
// the investor pays x(-q); price reports carry both numbers.
//
// Exit codes: 0 ok, 1 input error, 2 solver failure, 3 check failure.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mip/pareto_field.hpp"
#include "mip/scenario.hpp"
#include "mip/solver.hpp"
#include "mip/verify.hpp"

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.begin(), v.end());
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write output file: " << out_path << "\n";
    return 1;
  }
  out << text;
  return 0;
}

struct Loaded {
  mip::ScenarioDocument doc;
  mip::InitialState initial;
};

Loaded load(const std::string& path) {
  Loaded l;
  l.doc = mip::load_scenario_file(path);
  l.initial = mip::build_initial(l.doc);
  return l;
}

Eigen::VectorXd make_order(const std::vector<double>& raw, int j_claims, const char* flag) {
  if (raw.empty()) return Eigen::VectorXd::Zero(j_claims);
  if (static_cast<int>(raw.size()) != j_claims)
    throw mip::ValidationError(std::string(flag) + " has " + std::to_string(raw.size()) +
                               " components, expected " + std::to_string(j_claims));
  return Eigen::Map<const Eigen::VectorXd>(raw.data(), raw.size());
}

Eigen::VectorXd utility_residuals(const Loaded& l, const mip::IndifferenceResult& res) {
  const int m_count = l.doc.space.m_makers;
  Eigen::VectorXd out(m_count);
  Eigen::VectorXd buf(l.doc.space.n_states);
  for (int m = 0; m < m_count; ++m) {
    for (int w = 0; w < l.doc.space.n_states; ++w)
      buf[w] = l.doc.utilities[m].value(res.alloc1(m, w));
    out[m] = mip::expectation(l.doc.space.probs, buf) - l.initial.u0[m];
  }
  return out;
}

int cmd_price(const Loaded& l, const std::vector<double>& order_raw,
              const std::string& out_path) {
  const Eigen::VectorXd q = make_order(order_raw, l.doc.space.j_claims, "--order");
  const auto res = mip::solve_indifference(l.doc.space, l.doc.utilities, l.initial, q);
  const auto rep = mip::impact_report(l.doc.space, res);
  const auto mirrored =
      mip::solve_indifference(l.doc.space, l.doc.utilities, l.initial, (-q).eval());

  nlohmann::json out;
  out["q"] = to_std(q);
  out["x"] = res.x;
  out["investor_pays"] = mirrored.x;  // cash paid to buy q from the makers
  out["w"] = to_std(res.w);
  out["gradient"] = to_std(rep.gradient);
  out["u0_residuals"] = to_std(utility_residuals(l, res));
  out["iterations"] = res.diagnostics.iterations;
  out["residual"] = res.diagnostics.residual;
  return emit(out.dump(2) + "\n", out_path);
}

int cmd_impact(const Loaded& l, const std::vector<double>& order_raw,
               const std::vector<double>& dq_raw, const std::string& out_path) {
  const Eigen::VectorXd q = make_order(order_raw, l.doc.space.j_claims, "--order");
  Eigen::VectorXd dq;
  if (dq_raw.empty()) {
    dq = 0.1 * (q.cwiseAbs().array() + 1.0).matrix();
  } else {
    dq = make_order(dq_raw, l.doc.space.j_claims, "--dq");
  }

  const auto res = mip::solve_indifference(l.doc.space, l.doc.utilities, l.initial, q);
  const auto rep = mip::impact_report(l.doc.space, res);
  const auto terms = rep.expansion_terms(dq);
  const auto residual =
      mip::expansion_residual(l.doc.space, l.doc.utilities, l.initial, q, dq);
  const auto weight_term = mip::weight_term_diagnostics(rep, dq);

  nlohmann::json out;
  out["q"] = to_std(q);
  out["dq"] = to_std(dq);
  out["x"] = res.x;
  out["w"] = to_std(res.w);
  out["gradient"] = to_std(rep.gradient);
  out["A"] = matrix_json(rep.A);
  out["C"] = matrix_json(rep.C);
  out["D"] = matrix_json(rep.D);
  out["E"] = matrix_json(rep.E);
  out["H"] = matrix_json(rep.H);
  out["Z"] = matrix_json(rep.Z);
  out["expansion"] = {{"linear", terms.linear},
                      {"quad_tolerance", terms.quad_tolerance},
                      {"quad_covariance", terms.quad_covariance},
                      {"quad_variance", terms.quad_variance},
                      {"predicted", terms.predicted()}};
  out["residual"] = {{"actual", residual.actual},
                     {"predicted", residual.predicted},
                     {"residual", residual.residual}};
  out["weight_term"] = {{"variance_term", weight_term.variance_term},
                        {"weight_response", weight_term.weight_response},
                        {"measure_gap", weight_term.measure_gap},
                        {"variance_vanishes", weight_term.variance_vanishes},
                        {"response_vanishes", weight_term.response_vanishes},
                        {"measures_agree", weight_term.measures_agree},
                        {"consistent", weight_term.consistent}};
  out["iterations"] = res.diagnostics.iterations;
  return emit(out.dump(2) + "\n", out_path);
}

int cmd_curve(const Loaded& l, const std::vector<double>& order_raw, int axis, double from,
              double to, int steps, const std::string& format,
              const std::string& out_path) {
  const int j_claims = l.doc.space.j_claims;
  if (axis < 1 || axis > j_claims) {
    std::cerr << "--axis must be between 1 and " << j_claims << "\n";
    return 1;
  }
  if (steps < 2) {
    std::cerr << "--steps must be at least 2\n";
    return 1;
  }
  const Eigen::VectorXd base = make_order(order_raw, j_claims, "--order");
  const int j = axis - 1;
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(j_claims);
  unit[j] = 1.0;

  struct Row {
    double qj = 0.0;
    double x = 0.0, gradient = 0.0, hessian = 0.0;
    double quad_tolerance = 0.0, quad_covariance = 0.0, quad_variance = 0.0;
    bool ok = false;
  };
  std::vector<Row> rows(steps);

  // Successive solves warm-start from the previous point of the sweep, which
  // keeps the path identical from run to run.
  std::optional<mip::SaddleStart> warm;
  int converged = 0;
  for (int i = 0; i < steps; ++i) {
    Row& row = rows[i];
    row.qj = from + (to - from) * static_cast<double>(i) / (steps - 1);
    Eigen::VectorXd q = base;
    q[j] = row.qj;
    try {
      const auto res =
          mip::solve_indifference(l.doc.space, l.doc.utilities, l.initial, q, {},
                                  warm ? &*warm : nullptr);
      const auto rep = mip::impact_report(l.doc.space, res);
      const auto terms = rep.expansion_terms(unit);
      row.x = res.x;
      row.gradient = rep.gradient[j];
      row.hessian = rep.H(j, j);
      row.quad_tolerance = terms.quad_tolerance;
      row.quad_covariance = terms.quad_covariance;
      row.quad_variance = terms.quad_variance;
      row.ok = true;
      ++converged;
      warm = mip::SaddleStart{res.v_raw, res.x, res.q};
    } catch (const mip::SolverError&) {
      row.ok = false;
    }
  }

  std::string text;
  if (format == "csv") {
    text = "q,x,gradient,hessian,quad_tolerance,quad_covariance,quad_variance,status\n";
    for (const Row& row : rows) {
      text += fmt17(row.qj);
      if (row.ok) {
        text += "," + fmt17(row.x) + "," + fmt17(row.gradient) + "," + fmt17(row.hessian) +
                "," + fmt17(row.quad_tolerance) + "," + fmt17(row.quad_covariance) + "," +
                fmt17(row.quad_variance) + ",ok\n";
      } else {
        text += ",nan,nan,nan,nan,nan,nan,failed\n";
      }
    }
  } else {
    nlohmann::json out = nlohmann::json::array();
    for (const Row& row : rows) {
      nlohmann::json r;
      r["q"] = row.qj;
      r["status"] = row.ok ? "ok" : "failed";
      if (row.ok) {
        r["x"] = row.x;
        r["gradient"] = row.gradient;
        r["hessian"] = row.hessian;
        r["quad_tolerance"] = row.quad_tolerance;
        r["quad_covariance"] = row.quad_covariance;
        r["quad_variance"] = row.quad_variance;
      }
      out.push_back(std::move(r));
    }
    text = out.dump(2) + "\n";
  }

  const int rc = emit(text, out_path);
  if (rc != 0) return rc;
  if (converged == 0) {
    std::cerr << "no curve point converged\n";
    return 2;
  }
  return 0;
}

// Invariant suites behind `check`.  Fast level sweeps the closed-form layers;
// full adds the conjugacy battery and, on tiny instances, the grid-search
// saddle cross-check.

mip::CheckReport utility_suite(const Loaded& l) {
  std::vector<double> grid;
  for (double x = -10.0; x <= 10.0; x += 0.5) grid.push_back(x);
  mip::CheckReport merged;
  for (size_t m = 0; m < l.doc.utilities.size(); ++m) {
    const auto rep = l.doc.utilities[m].verify_assumptions(grid);
    for (const auto& item : rep.items)
      merged.items.push_back({"maker" + std::to_string(m) + "_" + item.name, item.pass,
                              item.margin, item.detail});
  }
  return merged;
}

mip::CheckReport solver_suite(const Loaded& l) {
  mip::CheckReport report;
  const auto& space = l.doc.space;

  const auto at_zero = mip::solve_indifference(space, l.doc.utilities, l.initial,
                                               Eigen::VectorXd::Zero(space.j_claims));
  report.items.push_back({"zero_order_price", std::abs(at_zero.x) <= 1e-10,
                          1e-10 - std::abs(at_zero.x), "x(0) = 0"});
  const double wdev = (at_zero.w - l.initial.lambda0).cwiseAbs().maxCoeff();
  report.items.push_back(
      {"zero_order_weights", wdev <= 1e-9, 1e-9 - wdev, "w(0) equals the initial weights"});

  bool all_single = true;
  for (const auto& u : l.doc.utilities) all_single = all_single && u.single_term();

  double preserve_worst = 0.0;
  double quad_min = 1e300;
  double oracle_worst = 0.0;
  bool weight_consistent = true;
  std::string weight_detail;
  for (int j = 0; j < space.j_claims; ++j) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(space.j_claims);
    q[j] = 0.5;
    const auto res = mip::solve_indifference(space, l.doc.utilities, l.initial, q);

    Eigen::VectorXd buf(space.n_states);
    for (int m = 0; m < space.m_makers; ++m) {
      for (int w = 0; w < space.n_states; ++w)
        buf[w] = l.doc.utilities[m].value(res.alloc1(m, w));
      preserve_worst = std::max(
          preserve_worst, std::abs(mip::expectation(space.probs, buf) - l.initial.u0[m]));
    }

    const auto rep = mip::impact_report(space, res);
    const auto terms = rep.expansion_terms(q);
    quad_min = std::min(
        {quad_min, terms.quad_tolerance, terms.quad_covariance, terms.quad_variance});

    const auto diag = mip::weight_term_diagnostics(rep, q);
    weight_consistent = weight_consistent && diag.consistent;
    if (j == 0)
      weight_detail = diag.response_vanishes
                          ? "weight term vanishes (single-term exponential economy)"
                          : "weight term expected-nonzero (mixed utilities)";

    if (all_single) {
      const double oracle = mip::verify::exp_closed_form_price(space, l.doc.utilities,
                                                               l.initial.sigma0, q);
      oracle_worst =
          std::max(oracle_worst, std::abs(res.x - oracle) / (1.0 + std::abs(oracle)));
    }
  }
  report.items.push_back({"utility_preservation", preserve_worst <= 1e-10,
                          1e-10 - preserve_worst,
                          "post-trade expected utilities stay at their initial levels"});
  report.items.push_back({"quadratic_nonnegative", quad_min >= -1e-12, quad_min + 1e-12,
                          "all three quadratic expansion terms are nonnegative"});
  report.items.push_back({"weight_term_consistent", weight_consistent,
                          weight_consistent ? 1.0 : -1.0, weight_detail});
  if (all_single)
    report.items.push_back({"exponential_oracle", oracle_worst <= 1e-8,
                            1e-8 - oracle_worst,
                            "price matches the closed-form aggregation formula"});
  return report;
}

mip::CheckReport saddle_grid_suite(const Loaded& l) {
  mip::CheckReport report;
  const auto& space = l.doc.space;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(space.j_claims);
  q[0] = 0.5;

  auto field_value = [&](const Eigen::VectorXd& v, double x) {
    return mip::field_derivatives(
               space, mip::eval_point(space, l.doc.utilities, l.initial.sigma0, v, x, q))
        .value;
  };
  const auto newton =
      mip::solve_saddle(space, l.doc.utilities, l.initial, l.initial.u0, 1.0, q);
  const auto brute = mip::verify::brute_force_saddle(field_value, l.initial.u0, 1.0);

  const double T = newton.point.total_tolerance.maxCoeff();
  const double pitch = brute.pitch_x + brute.pitch_w + T * brute.pitch_scale;
  const double slack = 0.5 * pitch * pitch + 1e-9;
  const double loc_tol = 2.0 * (brute.pitch_x + T * (brute.pitch_scale + brute.pitch_w));

  const double loc_err = std::abs(brute.x - newton.x);
  report.items.push_back({"saddle_location", loc_err <= loc_tol, loc_tol - loc_err,
                          "grid-search saddle location matches the Newton solve"});
  const double bracket =
      std::max(brute.sup_inf - newton.x - slack, newton.x - brute.inf_sup - slack);
  report.items.push_back({"saddle_bracket", bracket <= 0.0, -bracket,
                          "sup-inf and inf-sup straddle the saddle value"});
  const double gap = std::abs(brute.sup_inf - brute.inf_sup);
  report.items.push_back({"minimax_gap", gap <= 2.0 * slack, 2.0 * slack - gap,
                          "sup-inf equals inf-sup at grid resolution"});
  return report;
}

int cmd_check(const Loaded& l, const std::string& level, const std::string& out_path) {
  if (level != "fast" && level != "full") {
    std::cerr << "--level must be fast or full\n";
    return 1;
  }

  nlohmann::json suites;
  std::vector<std::string> failures;
  auto add = [&](const std::string& name, const mip::CheckReport& report) {
    suites[name] = mip::verify::report_to_json(report);
    for (const auto& item : report.items)
      if (!item.pass) failures.push_back(name + "." + item.name);
  };

  add("utility_assumptions", utility_suite(l));
  const auto grid = mip::PropertyGrid::defaults(l.doc.space.m_makers, l.doc.space.j_claims);
  add("field_properties",
      mip::check_F_space_properties(l.doc.space, l.doc.utilities, l.initial.sigma0,
                                    l.doc.risk_bound, grid));
  add("solver_identities", solver_suite(l));
  if (level == "full") {
    add("conjugacy_battery",
        mip::verify::conjugacy_battery(l.doc.space, l.doc.utilities, l.initial));
    if (l.doc.space.m_makers <= 3 && l.doc.space.n_states <= 3)
      add("saddle_grid", saddle_grid_suite(l));
  }

  nlohmann::json out;
  out["level"] = level;
  out["pass"] = failures.empty();
  out["suites"] = std::move(suites);
  const int rc = emit(out.dump(2) + "\n", out_path);
  if (rc != 0) return rc;
  if (!failures.empty()) {
    std::cerr << "check failed:";
    for (const auto& name : failures) std::cerr << " " << name;
    std::cerr << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Market indifference prices and price impact on finite scenario spaces"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string format;
  std::vector<double> order_raw;
  std::vector<double> dq_raw;
  int axis = 1;
  double from = -1.0, to = 1.0;
  int steps = 11;
  std::string level = "fast";

  auto add_common = [&](CLI::App* cmd, bool csv_allowed) {
    cmd->add_option("-s,--scenario", scenario_path, "Scenario JSON file")->required();
    cmd->add_option("-o,--out", out_path, "Write the report to this file instead of stdout");
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember(csv_allowed ? std::vector<std::string>{"json", "csv"}
                                          : std::vector<std::string>{"json"}));
  };

  auto* price = app.add_subcommand("price", "Indifference price of an order");
  add_common(price, false);
  price->add_option("-q,--order", order_raw, "Order, one value per security")
      ->delimiter(',');

  auto* curve = app.add_subcommand("curve", "Price curve along one security axis");
  add_common(curve, true);
  curve->add_option("-q,--order", order_raw, "Base order, one value per security")
      ->delimiter(',');
  curve->add_option("--axis", axis, "1-based security index to sweep");
  curve->add_option("--from", from, "Sweep start");
  curve->add_option("--to", to, "Sweep end");
  curve->add_option("--steps", steps, "Number of sweep points");

  auto* impact = app.add_subcommand("impact", "Second-order price impact report");
  add_common(impact, false);
  impact->add_option("-q,--order", order_raw, "Order, one value per security")
      ->delimiter(',');
  impact->add_option("--dq", dq_raw, "Further order for the expansion")->delimiter(',');

  auto* check = app.add_subcommand("check", "Run the invariant suites on a scenario");
  add_common(check, false);
  check->add_option("--level", level, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    const Loaded l = load(scenario_path);
    if (price->parsed()) return cmd_price(l, order_raw, out_path);
    if (curve->parsed())
      return cmd_curve(l, order_raw, axis, from, to, steps,
                       format.empty() ? "csv" : format, out_path);
    if (impact->parsed()) return cmd_impact(l, order_raw, dq_raw, out_path);
    if (check->parsed()) return cmd_check(l, level, out_path);
  } catch (const mip::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const mip::SolverError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
