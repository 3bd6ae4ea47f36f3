#include "mip/verify.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <nlohmann/json.hpp>

namespace mip::verify {

namespace {

double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// ln E[exp(g)] with the dominant exponent factored out.
double log_mean_exp(const Eigen::VectorXd& probs, const Eigen::VectorXd& g) {
  const double shift = g.maxCoeff();
  const Eigen::VectorXd scaled = (g.array() - shift).exp();
  return shift + std::log(expectation(probs, scaled));
}

}  // namespace

FdValue fd_derivative(const std::function<double(double)>& f, double x, double step) {
  const double coarse = central(f, x, step);
  const double fine = central(f, x, 0.5 * step);
  FdValue out;
  out.value = (4.0 * fine - coarse) / 3.0;
  out.error = std::abs(out.value - fine);
  return out;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    auto slice = [&](double xi) {
      Eigen::VectorXd p = x;
      p[i] = xi;
      return f(p);
    };
    g[i] = fd_derivative(slice, x[i], h).value;
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
  const Eigen::VectorXd base = f(x);
  Eigen::MatrixXd jac(base.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    auto at = [&](double xi) {
      Eigen::VectorXd p = x;
      p[i] = xi;
      return f(p);
    };
    const Eigen::VectorXd coarse = (at(x[i] + h) - at(x[i] - h)) / (2.0 * h);
    const Eigen::VectorXd fine = (at(x[i] + 0.5 * h) - at(x[i] - 0.5 * h)) / h;
    jac.col(i) = (4.0 * fine - coarse) / 3.0;
  }
  return jac;
}

double exp_closed_form_price(const ScenarioSpace& space, const Eigen::VectorXd& sigma0,
                             double aggregate_tolerance, const Eigen::VectorXd& q) {
  if (!(aggregate_tolerance > 0.0))
    throw ValidationError("aggregate tolerance must be strictly positive");
  const Eigen::VectorXd total = sigma0 + space.payoffs * q;
  const double with_order = log_mean_exp(space.probs, -total / aggregate_tolerance);
  const double without = log_mean_exp(space.probs, -sigma0 / aggregate_tolerance);
  return aggregate_tolerance * (with_order - without);
}

double exp_closed_form_price(const ScenarioSpace& space,
                             std::span<const ExpMixtureUtility> utilities,
                             const Eigen::VectorXd& sigma0, const Eigen::VectorXd& q) {
  double t_sum = 0.0;
  for (const auto& u : utilities) {
    if (!u.single_term())
      throw ValidationError("closed-form price needs every maker single-term exponential");
    t_sum += 1.0 / u.terms()[0].alpha;
  }
  return exp_closed_form_price(space, sigma0, t_sum, q);
}

namespace {

// Golden-section minimum of a strictly convex function on [lo, hi].
double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = 0.5 * (lo + hi);
    return out;
  }
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

// Simplex grid over the first M-1 coordinates within per-coordinate ranges;
// the last coordinate is the remainder, kept above the floor.
std::vector<Eigen::VectorXd> weight_grid(const std::vector<std::pair<double, double>>& ranges,
                                         int points, double floor, int m_count) {
  std::vector<Eigen::VectorXd> out;
  if (m_count == 1) {
    out.push_back(Eigen::VectorXd::Ones(1));
    return out;
  }
  std::vector<std::vector<double>> axes;
  for (const auto& [lo, hi] : ranges) axes.push_back(linspace(lo, hi, points));
  std::vector<int> idx(axes.size(), 0);
  while (true) {
    Eigen::VectorXd w(m_count);
    double sum = 0.0;
    for (std::size_t i = 0; i < axes.size(); ++i) {
      w[static_cast<Eigen::Index>(i)] = axes[i][idx[i]];
      sum += axes[i][idx[i]];
    }
    w[m_count - 1] = 1.0 - sum;
    if (w[m_count - 1] >= floor) out.push_back(w);
    int pos = static_cast<int>(axes.size()) - 1;
    while (pos >= 0 && ++idx[pos] == static_cast<int>(axes[pos].size())) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

BruteForceResult brute_force_saddle(
    const std::function<double(const Eigen::VectorXd&, double)>& field_value,
    const Eigen::VectorXd& u, double y, const SaddleGridSpec& grid) {
  const int m_count = static_cast<int>(u.size());
  if (m_count > 3) throw ValidationError("brute-force saddle search is limited to 3 makers");

  auto lagrangian = [&](const Eigen::VectorXd& v, double x) {
    return u.dot(v) + x * y - field_value(v, x);
  };

  std::vector<std::pair<double, double>> w_ranges(
      std::max(0, m_count - 1), {grid.weight_floor, 1.0 - grid.weight_floor});
  double ln_s_lo = std::log(grid.scale_lo), ln_s_hi = std::log(grid.scale_hi);
  double x_lo = grid.x_lo, x_hi = grid.x_hi;

  BruteForceResult best;
  double pitch_w = 0.0, pitch_s = 0.0, pitch_x = 0.0;
  Eigen::VectorXd best_w = Eigen::VectorXd::Constant(m_count, 1.0 / m_count);
  double best_ln_s = 0.0, best_x = 0.0;

  std::vector<Eigen::VectorXd> weights;
  std::vector<double> scales, xs;

  for (int level = 0; level < grid.refine_levels; ++level) {
    weights = weight_grid(w_ranges, grid.weight_points, grid.weight_floor, m_count);
    scales = linspace(ln_s_lo, ln_s_hi, grid.scale_points);
    xs = linspace(x_lo, x_hi, grid.x_points);
    pitch_w = m_count > 1 ? (w_ranges[0].second - w_ranges[0].first) / (grid.weight_points - 1)
                          : 0.0;
    pitch_s = (ln_s_hi - ln_s_lo) / (grid.scale_points - 1);
    pitch_x = (x_hi - x_lo) / (grid.x_points - 1);

    double outer = -1e300;
    for (const auto& w : weights)
      for (double ln_s : scales) {
        const Eigen::VectorXd v = std::exp(ln_s) * w;
        const double x_star = golden_min([&](double x) { return lagrangian(v, x); }, x_lo, x_hi);
        const double val = lagrangian(v, x_star);
        if (val > outer) {
          outer = val;
          best_w = w;
          best_ln_s = ln_s;
          best_x = x_star;
        }
      }

    if (level + 1 < grid.refine_levels) {
      for (int i = 0; i < m_count - 1; ++i) {
        const double lo = std::max(grid.weight_floor, best_w[i] - 2.0 * pitch_w);
        const double hi = std::min(1.0 - grid.weight_floor, best_w[i] + 2.0 * pitch_w);
        w_ranges[static_cast<std::size_t>(i)] = {lo, hi};
      }
      ln_s_lo = best_ln_s - 2.0 * pitch_s;
      ln_s_hi = best_ln_s + 2.0 * pitch_s;
      x_lo = best_x - 2.0 * pitch_x;
      x_hi = best_x + 2.0 * pitch_x;
    }
  }

  best.v = std::exp(best_ln_s) * best_w;
  best.x = best_x;
  best.value = lagrangian(best.v, best.x);
  best.pitch_x = pitch_x;
  best.pitch_w = pitch_w;
  best.pitch_scale = pitch_s;

  // Both minimax orders on the same final product grid.
  std::vector<Eigen::VectorXd> vs;
  for (const auto& w : weights)
    for (double ln_s : scales) vs.push_back(std::exp(ln_s) * w);
  Eigen::MatrixXd table(vs.size(), xs.size());
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t k = 0; k < xs.size(); ++k)
      table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          lagrangian(vs[i], xs[k]);
  best.sup_inf = table.rowwise().minCoeff().maxCoeff();
  best.inf_sup = table.colwise().maxCoeff().minCoeff();
  return best;
}

CheckReport conjugacy_battery(const ScenarioSpace& space,
                              std::span<const ExpMixtureUtility> utilities,
                              const InitialState& initial, const BatteryOptions& opts) {
  const int m_count = space.m_makers;
  const int j_claims = space.j_claims;
  const double c = economy_risk_bound(utilities);

  // Conjugate-pair grid: tilted utility targets around the initial book and
  // a few order points on the first axis.
  std::vector<Eigen::VectorXd> u_points;
  u_points.push_back(initial.u0);
  u_points.push_back(0.8 * initial.u0);
  {
    Eigen::VectorXd tilted = 1.1 * initial.u0;
    tilted[0] = 1.3 * initial.u0[0];
    u_points.push_back(tilted);
  }
  std::vector<Eigen::VectorXd> q_points;
  q_points.push_back(Eigen::VectorXd::Zero(j_claims));
  {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(j_claims);
    q[0] = 0.5;
    q_points.push_back(q);
    q_points.push_back(-q);
  }

  double value_err = 0.0;       // saddle value identities
  double envelope_err = 0.0;    // FD of cash vs order gradient
  double metric_err = 0.0;      // B_fd * A vs identity
  double response_err = 0.0;    // E_fd vs -A^{-1} C
  double hessian_err = 0.0;     // H_fd vs C^T A^{-1} C + D
  double homogeneity_err = 0.0; // cash at y = 2 vs twice y = 1
  double primal_bound_margin = 1e300;   // -v_m dF/dv_m in [1/c, c] dF/dx
  double dual_bound_margin = 1e300;     // -u_m v_m in [1/c, c] at y = 1
  double spectrum_margin = 1e300;       // A and B_fd spectra in [1/c, c]
  double unit_solution_margin = 1e300;  // solve B z = 1, z in [1/c, c]

  for (const auto& u : u_points)
    for (const auto& q : q_points) {
      const SaddleResult saddle = solve_saddle(space, utilities, initial, u, 1.0, q);
      const Eigen::VectorXd v = saddle.v;
      const FieldDerivatives& f = saddle.field;

      value_err = std::max(value_err,
                           std::abs(f.value - u.dot(v)) / std::max(1.0, std::abs(f.value)));

      const double cash2 = collective_cash(space, utilities, initial, u, 2.0, q);
      homogeneity_err = std::max(
          homogeneity_err,
          std::abs(cash2 - 2.0 * saddle.x) / std::max(1.0, std::abs(2.0 * saddle.x)));

      // Envelope: d(cash)/dq matches -dF/dq across the transform.
      for (int j = 0; j < j_claims; ++j) {
        auto cash_at = [&](double qj) {
          Eigen::VectorXd qq = q;
          qq[j] = qj;
          return solve_saddle(space, utilities, initial, u, 1.0, qq).x;
        };
        const double fd = fd_derivative(cash_at, q[j], opts.fd_step).value;
        envelope_err = std::max(envelope_err,
                                std::abs(fd + f.grad_q[j]) / std::max(1.0, std::abs(fd)));
      }

      // Weight metric of the transform by finite differences of the solved
      // weights against the utility targets.
      auto weights_at_u = [&](const Eigen::VectorXd& uu) {
        return solve_saddle(space, utilities, initial, uu, 1.0, q).v;
      };
      Eigen::MatrixXd dv_du(m_count, m_count);
      for (int m = 0; m < m_count; ++m) {
        const double h = opts.fd_step * std::abs(u[m]);
        auto col = [&](double um) {
          Eigen::VectorXd uu = u;
          uu[m] = um;
          return weights_at_u(uu);
        };
        const Eigen::VectorXd coarse = (col(u[m] + h) - col(u[m] - h)) / (2.0 * h);
        const Eigen::VectorXd fine = (col(u[m] + 0.5 * h) - col(u[m] - 0.5 * h)) / h;
        dv_du.col(m) = (4.0 * fine - coarse) / 3.0;
      }
      Eigen::MatrixXd b_fd(m_count, m_count);
      for (int l = 0; l < m_count; ++l)
        for (int m = 0; m < m_count; ++m) b_fd(l, m) = dv_du(l, m) / (v[l] * v[m]);
      metric_err =
          std::max(metric_err, (b_fd * f.A - Eigen::MatrixXd::Identity(m_count, m_count))
                                   .cwiseAbs()
                                   .maxCoeff());

      // Weight response to the order by finite differences.
      auto weights_at_q = [&](const Eigen::VectorXd& qq) {
        return solve_saddle(space, utilities, initial, u, 1.0, qq).v;
      };
      Eigen::MatrixXd e_fd(m_count, j_claims);
      for (int j = 0; j < j_claims; ++j) {
        const double h = opts.fd_step;
        auto col = [&](double qj) {
          Eigen::VectorXd qq = q;
          qq[j] = qj;
          return weights_at_q(qq);
        };
        const Eigen::VectorXd coarse = (col(q[j] + h) - col(q[j] - h)) / (2.0 * h);
        const Eigen::VectorXd fine = (col(q[j] + 0.5 * h) - col(q[j] - 0.5 * h)) / h;
        e_fd.col(j) = ((4.0 * fine - coarse) / 3.0).cwiseQuotient(v);
      }
      const Eigen::MatrixXd e_closed =
          -Eigen::LDLT<Eigen::MatrixXd>(f.A).solve(f.C);
      response_err = std::max(response_err, (e_fd - e_closed).cwiseAbs().maxCoeff());

      // Order Hessian by finite differences of the order gradient.
      auto grad_at_q = [&](const Eigen::VectorXd& qq) {
        return Eigen::VectorXd(
            -solve_saddle(space, utilities, initial, u, 1.0, qq).field.grad_q);
      };
      const Eigen::MatrixXd h_fd = fd_jacobian(grad_at_q, q, opts.fd_step);
      const Eigen::MatrixXd h_closed =
          f.D + f.C.transpose() * Eigen::LDLT<Eigen::MatrixXd>(f.A).solve(f.C);
      hessian_err = std::max(hessian_err, (0.5 * (h_fd + h_fd.transpose()) - h_closed)
                                              .cwiseAbs()
                                              .maxCoeff());

      for (int m = 0; m < m_count; ++m) {
        const double primal = -v[m] * f.grad_v[m];
        primal_bound_margin = std::min(
            {primal_bound_margin, primal - f.grad_x / c, c * f.grad_x - primal});
        const double dual = -u[m] * v[m];
        dual_bound_margin = std::min({dual_bound_margin, dual - 1.0 / c, c - dual});
      }

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_a(f.A);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_b(
          0.5 * (b_fd + b_fd.transpose()));
      spectrum_margin =
          std::min({spectrum_margin, es_a.eigenvalues().minCoeff() - (1.0 / c - 1e-8),
                    (c + 1e-8) - es_a.eigenvalues().maxCoeff(),
                    es_b.eigenvalues().minCoeff() - (1.0 / c - 1e-4),
                    (c + 1e-4) - es_b.eigenvalues().maxCoeff()});

      const Eigen::VectorXd z =
          Eigen::PartialPivLU<Eigen::MatrixXd>(b_fd).solve(Eigen::VectorXd::Ones(m_count));
      unit_solution_margin =
          std::min({unit_solution_margin, z.minCoeff() - (1.0 / c - 1e-4),
                    (c + 1e-4) - z.maxCoeff()});
    }

  CheckReport report;
  auto add = [&](const std::string& name, double err, double tol, const std::string& detail) {
    report.items.push_back({name, err <= tol, tol - err, detail});
  };
  add("saddle_value", value_err, opts.algebra_tol, "F equals <u, v> at conjugate pairs");
  add("dual_homogeneity", homogeneity_err, 1e-11, "cash at y=2 equals twice cash at y=1");
  add("envelope_order_gradient", envelope_err, opts.envelope_tol,
      "d(cash)/dq = -dF/dq across the transform");
  add("weight_metric_inverse", metric_err, opts.fd_tol, "B(transform) inverts A(field)");
  add("weight_response", response_err, opts.fd_tol, "dv/dq matches -A^{-1} C");
  add("order_hessian", hessian_err, opts.fd_tol, "d2(cash)/dq2 matches C^T A^{-1} C + D");
  report.items.push_back({"primal_marginal_bounds", primal_bound_margin >= -1e-12,
                          primal_bound_margin, "-v_m dF/dv_m in [1/c, c] dF/dx"});
  report.items.push_back({"dual_marginal_bounds", dual_bound_margin >= -1e-10,
                          dual_bound_margin, "-u_m v_m in [1/c, c] at y = 1"});
  report.items.push_back({"metric_spectra", spectrum_margin >= 0.0, spectrum_margin,
                          "spectra of A and B inside the aversion envelope"});
  report.items.push_back({"unit_solution_bounds", unit_solution_margin >= 0.0,
                          unit_solution_margin, "B z = 1 has z inside [1/c, c]"});
  return report;
}

nlohmann::json report_to_json(const CheckReport& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : report.items)
    items.push_back({{"name", it.name},
                     {"pass", it.pass},
                     {"margin", it.margin},
                     {"detail", it.detail}});
  return nlohmann::json{{"pass", report.pass()}, {"items", std::move(items)}};
}

}  // namespace mip::verify
