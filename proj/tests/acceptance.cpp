// Acceptance gate: every release-blocking criterion in one binary, one
// PASS/FAIL line per criterion, nonzero exit if any fails.
//
// The corpus mixes the three canonical instances, twenty randomized
// all-exponential economies (two at desk scale) and eight randomized mixed
// economies.  All randomness is seeded, so the run is deterministic.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mip/representative.hpp"
#include "mip/solver.hpp"
#include "mip/verify.hpp"
#include "support/instances.hpp"

namespace {

using testsup::Instance;

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

struct Corpus {
  std::vector<Instance> canonical;
  std::vector<Instance> exponential;  // single-term makers only
  std::vector<Instance> mixed;        // two-term makers
  std::vector<const Instance*> all;

  static Corpus build() {
    Corpus c;
    c.canonical.push_back(testsup::log_cosh_instance());
    c.canonical.push_back(testsup::two_maker_instance());
    c.canonical.push_back(testsup::mixed_instance());
    for (unsigned seed = 1; seed <= 18; ++seed)
      c.exponential.push_back(testsup::random_exponential(
          seed, 4 + static_cast<int>(seed % 9), 1 + static_cast<int>(seed % 4),
          1 + static_cast<int>(seed % 3)));
    // Desk scale: the largest books the solver has to clear in one beat.
    c.exponential.push_back(testsup::random_exponential(9001, 1000, 8, 16));
    c.exponential.push_back(testsup::random_exponential(9002, 600, 5, 9));
    for (unsigned seed = 51; seed <= 58; ++seed)
      c.mixed.push_back(testsup::random_mixed(seed, 4 + static_cast<int>(seed % 7),
                                              2 + static_cast<int>(seed % 3),
                                              1 + static_cast<int>(seed % 3)));
    for (const auto& i : c.canonical) c.all.push_back(&i);
    for (const auto& i : c.exponential) c.all.push_back(&i);
    for (const auto& i : c.mixed) c.all.push_back(&i);
    return c;
  }
};

mip::IndifferenceResult price(const Instance& inst, const Eigen::VectorXd& q,
                              const mip::SaddleStart* warm = nullptr) {
  return mip::solve_indifference(inst.doc.space, inst.doc.utilities, inst.initial, q, {},
                                 warm);
}

// 1. x(0) = 0 and w(0) = lambda0 on every corpus instance.
Criterion criterion_identity(const Corpus& corpus) {
  double worst_x = 0.0, worst_w = 0.0;
  for (const Instance* inst : corpus.all) {
    const auto res = price(*inst, Eigen::VectorXd::Zero(inst->doc.space.j_claims));
    worst_x = std::max(worst_x, std::abs(res.x));
    worst_w = std::max(worst_w, (res.w - inst->initial.lambda0).cwiseAbs().maxCoeff());
  }
  return {"identity case", worst_x <= 1e-10 && worst_w <= 1e-9,
          fmt("max |x(0)| %.2e (tol 1e-10), max weight drift %.2e (tol 1e-9), %zu instances",
              worst_x, worst_w, corpus.all.size())};
}

// 2. Closed-form oracle on 20 randomized all-exponential instances in < 5 s,
//    every single solve < 1 s.
Criterion criterion_exponential_oracle(const Corpus& corpus) {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0, worst_solve_s = 0.0;
  unsigned seed = 7000;
  for (const Instance& inst : corpus.exponential) {
    const auto q = testsup::random_order(++seed, inst.doc.space.j_claims, 1.5);
    const auto s0 = std::chrono::steady_clock::now();
    const auto res = price(inst, q);
    const double solve_s = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - s0).count();
    worst_solve_s = std::max(worst_solve_s, solve_s);
    const double oracle = mip::verify::exp_closed_form_price(
        inst.doc.space, inst.doc.utilities, inst.initial.sigma0, q);
    worst = std::max(worst, std::abs(res.x - oracle) / (1.0 + std::abs(oracle)));
  }
  const double total_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {"exponential oracle",
          worst <= 1e-8 && total_s < 5.0 && worst_solve_s < 1.0,
          fmt("max rel err %.2e (tol 1e-8) on %zu instances, suite %.2f s (limit 5), "
              "slowest solve %.3f s (limit 1)",
              worst, corpus.exponential.size(), total_s, worst_solve_s)};
}

// 3. Every maker's expected utility returns to its initial level.
Criterion criterion_preservation(const Corpus& corpus) {
  double worst = 0.0;
  unsigned seed = 7100;
  for (const Instance* inst : corpus.all) {
    const auto& space = inst->doc.space;
    const auto q = testsup::random_order(++seed, space.j_claims, 1.0);
    const auto res = price(*inst, q);
    Eigen::VectorXd buf(space.n_states);
    for (int m = 0; m < space.m_makers; ++m) {
      for (int w = 0; w < space.n_states; ++w)
        buf[w] = inst->doc.utilities[m].value(res.alloc1(m, w));
      worst = std::max(worst,
                       std::abs(mip::expectation(space.probs, buf) - inst->initial.u0[m]));
    }
  }
  return {"indifference preservation", worst <= 1e-10,
          fmt("max |E[u(post-trade)] - u0| %.2e (tol 1e-10), %zu instances", worst,
              corpus.all.size())};
}

// 4. Finite differences of x(q) match the pricing-measure gradient.
Criterion criterion_gradient_law(const Corpus& corpus) {
  double worst = 0.0;
  unsigned seed = 7200;
  std::vector<const Instance*> small;
  for (const Instance* inst : corpus.all)
    if (inst->doc.space.n_states <= 64) small.push_back(inst);
  for (int k = 0; k < 50; ++k) {
    const Instance* inst = small[k % small.size()];
    const auto q = testsup::random_order(++seed, inst->doc.space.j_claims, 1.0);
    const auto base = price(*inst, q);
    const auto rep = mip::impact_report(inst->doc.space, base);
    const mip::SaddleStart warm{base.v_raw, base.x, base.q};
    const Eigen::VectorXd fd = mip::verify::fd_gradient(
        [&](const Eigen::VectorXd& qq) { return price(*inst, qq, &warm).x; }, q);
    const double err =
        (fd - rep.gradient).cwiseAbs().maxCoeff() /
        std::max(1.0, rep.gradient.cwiseAbs().maxCoeff());
    worst = std::max(worst, err);
  }
  return {"gradient law", worst <= 1e-6,
          fmt("max rel err %.2e (tol 1e-6) over 50 pairs", worst)};
}

// 5. Finite differences of the gradient match H, and H is PSD.
Criterion criterion_hessian_law(const Corpus& corpus) {
  double worst = 0.0, min_eig = 1e300;
  unsigned seed = 7300;
  std::vector<const Instance*> chosen;
  chosen.push_back(&corpus.canonical[0]);
  chosen.push_back(&corpus.canonical[2]);
  for (size_t i = 0; i < 4; ++i) chosen.push_back(&corpus.exponential[i]);
  for (size_t i = 0; i < 4; ++i) chosen.push_back(&corpus.mixed[i]);
  for (const Instance* inst : chosen) {
    const auto q = testsup::random_order(++seed, inst->doc.space.j_claims, 0.8);
    const auto base = price(*inst, q);
    const auto rep = mip::impact_report(inst->doc.space, base);
    const mip::SaddleStart warm{base.v_raw, base.x, base.q};
    Eigen::MatrixXd fd = mip::verify::fd_jacobian(
        [&](const Eigen::VectorXd& qq) {
          const auto r = price(*inst, qq, &warm);
          return Eigen::VectorXd(mip::impact_report(inst->doc.space, r).gradient);
        },
        q);
    fd = 0.5 * (fd + fd.transpose()).eval();
    worst = std::max(worst, (fd - rep.H).cwiseAbs().maxCoeff() /
                                std::max(1.0, rep.H.cwiseAbs().maxCoeff()));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.H);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
  }
  return {"hessian law", worst <= 1e-5 && min_eig >= -1e-10,
          fmt("max rel err %.2e (tol 1e-5), min eig %.2e (floor -1e-10), %zu instances",
              worst, min_eig, chosen.size())};
}

// 6. Prediction residual decays at third order along a halving sequence, and
//    the coin-flip numbers come out exactly.
Criterion criterion_expansion(const Corpus& corpus) {
  const auto& logcosh = corpus.canonical[0];
  Eigen::VectorXd q0 = Eigen::VectorXd::Zero(1), dq0(1);
  dq0 << 0.1;
  const auto probe = mip::expansion_residual(logcosh.doc.space, logcosh.doc.utilities,
                                             logcosh.initial, q0, dq0);
  const bool coin_ok = std::abs(probe.actual - 0.0049916888216465303) <= 1e-12 &&
                       std::abs(probe.predicted - 0.005) <= 1e-12 &&
                       std::abs(probe.residual) <= 1e-5;

  double worst_factor = 0.0;
  unsigned seed = 7400;
  std::vector<const Instance*> chosen;
  for (const auto& inst : corpus.canonical) chosen.push_back(&inst);
  for (size_t i = 0; i < 3; ++i) chosen.push_back(&corpus.mixed[i]);
  for (const Instance* inst : chosen) {
    const int j_claims = inst->doc.space.j_claims;
    Eigen::VectorXd base = testsup::random_order(++seed, j_claims, 0.5);
    base[0] += 0.4;  // keep the probe away from symmetry points
    Eigen::VectorXd dq = testsup::random_order(++seed, j_claims, 1.0);
    dq[0] += 0.3;
    dq *= 0.2 / dq.norm();
    double prev = -1.0;
    for (int k = 0; k <= 5; ++k) {
      const auto out = mip::expansion_residual(inst->doc.space, inst->doc.utilities,
                                               inst->initial, base, dq);
      const double ratio = std::abs(out.residual) / dq.squaredNorm();
      if (prev > 0.0) worst_factor = std::max(worst_factor, ratio / prev);
      prev = ratio;
      dq *= 0.5;
    }
  }
  return {"second-order expansion", coin_ok && worst_factor <= 0.6,
          fmt("coin flip residual %.3e (tol 1e-5), worst halving factor %.3f (limit 0.6)",
              probe.residual, worst_factor)};
}

// 7. The three quadratic terms are nonnegative; the payoff-variance term is
//    strictly positive whenever the order payoff has cross-state spread.
Criterion criterion_nonnegativity(const Corpus& corpus) {
  double min_quad = 1e300, min_spread_var = 1e300;
  unsigned seed = 7500;
  std::vector<const Instance*> small;
  for (const Instance* inst : corpus.all)
    if (inst->doc.space.n_states <= 64) small.push_back(inst);
  for (int k = 0; k < 100; ++k) {
    const Instance* inst = small[k % small.size()];
    const auto q = testsup::random_order(++seed, inst->doc.space.j_claims, 0.8);
    const auto dq = testsup::random_order(++seed, inst->doc.space.j_claims, 1.2);
    const auto rep = mip::impact_report(inst->doc.space, price(*inst, q));
    const auto terms = rep.expansion_terms(dq);
    min_quad = std::min(
        {min_quad, terms.quad_tolerance, terms.quad_covariance, terms.quad_variance});
    const Eigen::VectorXd proceeds = inst->doc.space.payoffs * dq;
    const double spread = proceeds.maxCoeff() - proceeds.minCoeff();
    if (spread > 0.1) min_spread_var = std::min(min_spread_var, terms.quad_variance);
  }
  return {"quadratic nonnegativity", min_quad >= -1e-12 && min_spread_var > 1e-8,
          fmt("min quad %.2e (floor -1e-12), min spread-case variance term %.2e (floor 1e-8)",
              min_quad, min_spread_var)};
}

// 8. Weight-term trichotomy: exponential economies kill it, mixed economies
//    keep it, and the three independent tests always agree.
Criterion criterion_weight_term(const Corpus& corpus) {
  double worst_z = 0.0, worst_quad = 0.0;
  bool consistent = true;
  unsigned seed = 7600;
  for (const Instance& inst : corpus.exponential) {
    if (inst.doc.space.n_states > 64) continue;
    const int j_claims = inst.doc.space.j_claims;
    const auto rep = mip::impact_report(
        inst.doc.space, price(inst, testsup::random_order(++seed, j_claims, 0.8)));
    for (int j = -1; j < j_claims; ++j) {
      Eigen::VectorXd r;
      if (j < 0) {
        r = testsup::random_order(++seed, j_claims, 1.0);
      } else {
        r = Eigen::VectorXd::Zero(j_claims);
        r[j] = 1.0;
      }
      const auto diag = mip::weight_term_diagnostics(rep, r);
      worst_z = std::max(worst_z, diag.weight_response);
      worst_quad = std::max(worst_quad, rep.expansion_terms(r).quad_tolerance);
      consistent = consistent && diag.consistent && diag.response_vanishes;
    }
  }

  const auto& mixed = corpus.canonical[2];
  Eigen::VectorXd qm(1), rm(1);
  qm << 0.3;
  rm << 1.0;
  const auto rep = mip::impact_report(mixed.doc.space, price(mixed, qm));
  const auto diag = mip::weight_term_diagnostics(rep, rm);
  const double mixed_quad = rep.expansion_terms(rm).quad_tolerance;
  const bool mixed_ok = mixed_quad > 1e-6 && diag.consistent && !diag.variance_vanishes &&
                        !diag.response_vanishes && !diag.measures_agree;

  return {"weight-term trichotomy", worst_z <= 1e-9 && worst_quad <= 1e-12 &&
                                        consistent && mixed_ok,
          fmt("exponential: max |Z r| %.2e (tol 1e-9), max quad %.2e (tol 1e-12); "
              "mixed: quad %.2e (floor 1e-6), verdicts agree %s",
              worst_z, worst_quad, mixed_quad, mixed_ok ? "yes" : "no")};
}

// 9. A's spectrum sits inside the aversion envelope, and the
//    finite-difference dual metric inverts it.
Criterion criterion_spectral(const Corpus& corpus) {
  double worst_spectrum = -1e300;
  unsigned seed = 7700;
  for (const Instance* inst : corpus.all) {
    const auto q = testsup::random_order(++seed, inst->doc.space.j_claims, 0.8);
    const auto rep = mip::impact_report(inst->doc.space, price(*inst, q));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rep.A);
    const double c = inst->doc.risk_bound;
    worst_spectrum = std::max(worst_spectrum,
                              std::max((1.0 / c - 1e-8) - es.eigenvalues().minCoeff(),
                                       es.eigenvalues().maxCoeff() - (c + 1e-8)));
  }

  // B by finite differences of the weight response to the utility targets.
  double worst_inverse = 0.0;
  std::vector<const Instance*> chosen;
  chosen.push_back(&corpus.canonical[1]);
  chosen.push_back(&corpus.canonical[2]);
  chosen.push_back(&corpus.exponential[2]);
  chosen.push_back(&corpus.exponential[5]);
  chosen.push_back(&corpus.mixed[0]);
  chosen.push_back(&corpus.mixed[4]);
  for (const Instance* inst : chosen) {
    const auto& space = inst->doc.space;
    const int m_count = space.m_makers;
    const auto q = testsup::random_order(++seed, space.j_claims, 0.5);
    const auto base = price(*inst, q);
    const auto rep = mip::impact_report(space, base);
    const mip::SaddleStart warm{base.v_raw, base.x, base.q};
    Eigen::MatrixXd B(m_count, m_count);
    for (int m = 0; m < m_count; ++m) {
      const double h = 1e-4 * std::abs(inst->initial.u0[m]);
      auto v_at = [&](double um) {
        Eigen::VectorXd u = inst->initial.u0;
        u[m] = um;
        return mip::solve_saddle(space, inst->doc.utilities, inst->initial, u, 1.0, q, {},
                                 &warm)
            .v;
      };
      const Eigen::VectorXd vp = v_at(inst->initial.u0[m] + h);
      const Eigen::VectorXd vn = v_at(inst->initial.u0[m] - h);
      for (int ll = 0; ll < m_count; ++ll)
        B(ll, m) = (vp[ll] - vn[ll]) / (2.0 * h) / (base.v_raw[ll] * base.v_raw[m]);
    }
    const Eigen::MatrixXd prod = B * rep.A;
    worst_inverse = std::max(
        worst_inverse,
        (prod - Eigen::MatrixXd::Identity(m_count, m_count)).cwiseAbs().maxCoeff());
  }
  return {"spectral bounds and inversion",
          worst_spectrum <= 0.0 && worst_inverse <= 1e-5,
          fmt("worst envelope excess %.2e (tol 0 after 1e-8 slack) on %zu instances, "
              "max |B A - I| %.2e (tol 1e-5)",
              worst_spectrum, corpus.all.size(), worst_inverse)};
}

// 10. Closed-form representative-agent derivatives match finite differences,
//     and the homogeneity identities hold tightly.
Criterion criterion_representative(const Corpus&) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  double worst_fd = 0.0, worst_euler = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int m_count = 1 + static_cast<int>(rng() % 4);
    std::vector<mip::ExpMixtureUtility> us;
    for (int m = 0; m < m_count; ++m) {
      const double a1 = uni(0.5, 1.5);
      us.emplace_back(std::vector<mip::ExpMixtureUtility::Term>{
          {uni(0.5, 2.0), a1}, {uni(0.5, 2.0), a1 + uni(0.5, 1.5)}});
    }
    Eigen::VectorXd v(m_count);
    for (int m = 0; m < m_count; ++m) v[m] = uni(0.2, 2.5);
    const double x = uni(-3.0, 3.0);

    const auto r = mip::eval_representative(us, v, x);
    const auto d = mip::second_derivatives(r, v);

    auto rel = [](double got, double want) {
      return std::abs(got - want) / std::max(1.0, std::abs(want));
    };
    const auto fd_rxx = mip::verify::fd_derivative(
        [&](double t) { return mip::eval_representative(us, v, t).marginal; }, x, 1e-4);
    worst_fd = std::max(worst_fd, rel(d.r_xx, fd_rxx.value));
    for (int m = 0; m < m_count; ++m) {
      worst_fd = std::max(
          worst_fd,
          rel(d.r_vx[m], mip::verify::fd_derivative(
                             [&](double t) {
                               Eigen::VectorXd vv = v;
                               vv[m] = t;
                               return mip::eval_representative(us, vv, x).marginal;
                             },
                             v[m], 1e-4)
                             .value));
      worst_fd = std::max(
          worst_fd,
          rel(d.dalloc_dx[m], mip::verify::fd_derivative(
                                  [&](double t) {
                                    return mip::eval_representative(us, v, t).alloc[m];
                                  },
                                  x, 1e-4)
                                  .value));
      for (int l = 0; l < m_count; ++l) {
        worst_fd = std::max(
            worst_fd,
            rel(d.r_vv(l, m), mip::verify::fd_derivative(
                                  [&](double t) {
                                    Eigen::VectorXd vv = v;
                                    vv[l] = t;
                                    const auto rr = mip::eval_representative(us, vv, x);
                                    return us[m].value(rr.alloc[m]);
                                  },
                                  v[l], 1e-4)
                                  .value));
      }
    }

    // Homogeneity: r_x and the allocation are degree 1 and 0 in the weights.
    double euler = std::abs(v.dot(d.r_vx) - d.r_x);
    for (int m = 0; m < m_count; ++m) {
      double row = 0.0, arow = 0.0;
      for (int l = 0; l < m_count; ++l) {
        row += v[l] * d.r_vv(l, m);
        arow += v[l] * d.dalloc_dv(m, l);
      }
      euler = std::max({euler, std::abs(row), std::abs(arow)});
    }
    euler = std::max(euler, std::abs(d.dalloc_dx.sum() - 1.0));
    double value_sum = 0.0;
    for (int m = 0; m < m_count; ++m) value_sum += v[m] * us[m].value(r.alloc[m]);
    euler = std::max(euler, std::abs(value_sum - r.value) / std::max(1.0, std::abs(r.value)));
    worst_euler = std::max(worst_euler, euler);
  }
  return {"representative-agent calculus", worst_fd <= 1e-5 && worst_euler <= 1e-9,
          fmt("max FD rel err %.2e (tol 1e-5), max homogeneity defect %.2e (tol 1e-9), "
              "100 points",
              worst_fd, worst_euler)};
}

// 11. Grid-search saddles agree with the Newton solve on tiny instances.
Criterion criterion_brute_force(const Corpus&) {
  double worst_loc = 0.0, worst_gap = 0.0;
  for (unsigned k = 0; k < 20; ++k) {
    const int n_states = 2 + static_cast<int>(k % 2);
    const int m_count = 1 + static_cast<int>((k / 2) % 2);
    const Instance inst = (k % 4 < 2)
                              ? testsup::random_exponential(800 + k, n_states, m_count, 1)
                              : testsup::random_mixed(800 + k, n_states, m_count, 1);
    Eigen::VectorXd q(1);
    q << 0.5;
    auto field_value = [&](const Eigen::VectorXd& v, double x) {
      return mip::field_derivatives(
                 inst.doc.space,
                 mip::eval_point(inst.doc.space, inst.doc.utilities, inst.initial.sigma0, v,
                                 x, q))
          .value;
    };
    const auto newton = mip::solve_saddle(inst.doc.space, inst.doc.utilities, inst.initial,
                                          inst.initial.u0, 1.0, q);
    const auto brute = mip::verify::brute_force_saddle(field_value, inst.initial.u0, 1.0);
    const double T = newton.point.total_tolerance.maxCoeff();
    const double pitch = brute.pitch_x + T * (brute.pitch_scale + brute.pitch_w);
    worst_loc = std::max(worst_loc, std::abs(brute.x - newton.x) / (2.0 * pitch));
    const double slack = 0.5 * pitch * pitch + 1e-9;
    worst_gap =
        std::max(worst_gap, std::abs(brute.sup_inf - brute.inf_sup) / (2.0 * slack));
  }
  return {"brute-force saddle agreement", worst_loc <= 1.0 && worst_gap <= 1.0,
          fmt("worst location error %.2f of twice the grid pitch, worst minimax gap %.2f "
              "of grid slack, 20 instances",
              worst_loc, worst_gap)};
}

// 12. Envelope identity: the order gradient of the collective cash equals
//     minus the order gradient of the field at conjugate points.
Criterion criterion_envelope(const Corpus& corpus) {
  double worst = 0.0;
  unsigned seed = 7900;
  std::mt19937_64 rng(1717);
  std::uniform_real_distribution<double> tilt(0.85, 1.15);
  std::vector<const Instance*> small;
  for (const Instance* inst : corpus.all)
    if (inst->doc.space.n_states <= 64) small.push_back(inst);
  for (int k = 0; k < 30; ++k) {
    const Instance* inst = small[k % small.size()];
    const auto& space = inst->doc.space;
    Eigen::VectorXd u = inst->initial.u0;
    for (int m = 0; m < space.m_makers; ++m) u[m] *= tilt(rng);
    const auto q = testsup::random_order(++seed, space.j_claims, 0.8);
    const auto at_q = mip::solve_saddle(space, inst->doc.utilities, inst->initial, u, 1.0, q);
    const mip::SaddleStart warm{at_q.v, at_q.x, q};
    const Eigen::VectorXd fd = mip::verify::fd_gradient(
        [&](const Eigen::VectorXd& qq) {
          return mip::solve_saddle(space, inst->doc.utilities, inst->initial, u, 1.0, qq,
                                   {}, &warm)
              .x;
        },
        q);
    const double err = (fd + at_q.field.grad_q).cwiseAbs().maxCoeff() /
                       std::max(1.0, at_q.field.grad_q.cwiseAbs().maxCoeff());
    worst = std::max(worst, err);
  }
  return {"envelope identity", worst <= 1e-6,
          fmt("max rel err %.2e (tol 1e-6) over 30 conjugate points", worst)};
}

}  // namespace

int main() {
  const Corpus corpus = Corpus::build();
  std::vector<Criterion> results;
  results.push_back(criterion_identity(corpus));
  results.push_back(criterion_exponential_oracle(corpus));
  results.push_back(criterion_preservation(corpus));
  results.push_back(criterion_gradient_law(corpus));
  results.push_back(criterion_hessian_law(corpus));
  results.push_back(criterion_expansion(corpus));
  results.push_back(criterion_nonnegativity(corpus));
  results.push_back(criterion_weight_term(corpus));
  results.push_back(criterion_spectral(corpus));
  results.push_back(criterion_representative(corpus));
  results.push_back(criterion_brute_force(corpus));
  results.push_back(criterion_envelope(corpus));

  int failures = 0;
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.pass) ++failures;
    std::printf("[%s] %2zu %-32s %s\n", r.pass ? "PASS" : "FAIL", i + 1, r.name.c_str(),
                r.detail.c_str());
  }
  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria failed\n", failures, results.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", results.size());
  return 0;
}
