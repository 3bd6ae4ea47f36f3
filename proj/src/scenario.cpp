#include "mip/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "mip/representative.hpp"

namespace mip {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

double finite_number(const nlohmann::json& j, const std::string& what) {
  if (!j.is_number()) throw ValidationError(what + " must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw ValidationError(what + " must be finite");
  return x;
}

InitialSpec parse_initial(const nlohmann::json& j, int m_makers, int n_states) {
  if (!j.is_object()) throw ValidationError("initial must be an object");
  InitialSpec spec;
  const std::string mode = j.value("mode", std::string());
  if (mode == "weights") {
    spec.mode = InitialSpec::Mode::weights;
    const auto& lambda = j.at("lambda");
    const auto& sigma0 = j.at("sigma0");
    if (!lambda.is_array() || static_cast<int>(lambda.size()) != m_makers)
      throw ValidationError("lambda must list one weight per maker");
    if (!sigma0.is_array() || static_cast<int>(sigma0.size()) != n_states)
      throw ValidationError("sigma0 must list one endowment per state");
    spec.lambda.resize(m_makers);
    for (int m = 0; m < m_makers; ++m) spec.lambda[m] = finite_number(lambda[m], "lambda entry");
    spec.sigma0.resize(n_states);
    for (int w = 0; w < n_states; ++w) spec.sigma0[w] = finite_number(sigma0[w], "sigma0 entry");
  } else if (mode == "allocations") {
    spec.mode = InitialSpec::Mode::allocations;
    const auto& alpha0 = j.at("alpha0");
    if (!alpha0.is_array() || static_cast<int>(alpha0.size()) != m_makers)
      throw ValidationError("alpha0 must list one allocation row per maker");
    spec.alpha0.resize(m_makers, n_states);
    for (int m = 0; m < m_makers; ++m) {
      const auto& row = alpha0[m];
      if (!row.is_array() || static_cast<int>(row.size()) != n_states)
        throw ValidationError("alpha0 row " + std::to_string(m) + " must list one value per state");
      for (int w = 0; w < n_states; ++w)
        spec.alpha0(m, w) = finite_number(row[w], "alpha0 entry");
    }
  } else {
    throw ValidationError("initial.mode must be \"weights\" or \"allocations\"");
  }
  return spec;
}

}  // namespace

ScenarioDocument load_scenario(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ValidationError("scenario must be a JSON object");

  ScenarioDocument out;

  const auto& states = doc.at("states");
  if (!states.is_array() || states.empty())
    throw ValidationError("states must be a non-empty array");
  const int n = static_cast<int>(states.size());

  const auto& first = states[0];
  if (!first.is_object() || !first.contains("payoffs") || !first["payoffs"].is_array())
    throw ValidationError("each state needs prob and a payoffs array");
  const int j_claims = static_cast<int>(first["payoffs"].size());
  if (j_claims < 1) throw ValidationError("states must list at least one security payoff");

  out.space.n_states = n;
  out.space.j_claims = j_claims;
  out.space.probs.resize(n);
  out.space.payoffs.resize(n, j_claims);
  for (int w = 0; w < n; ++w) {
    const auto& st = states[w];
    if (!st.is_object()) throw ValidationError("states entries must be objects");
    const double p = finite_number(st.at("prob"), "state probability");
    if (p == 0.0) throw ValidationError("zero-probability state " + std::to_string(w));
    if (p < 0.0)
      throw ValidationError("negative probability at state " + std::to_string(w));
    out.space.probs[w] = p;
    const auto& payoffs = st.at("payoffs");
    if (!payoffs.is_array() || static_cast<int>(payoffs.size()) != j_claims)
      throw ValidationError("state " + std::to_string(w) + " has " +
                            std::to_string(payoffs.size()) + " payoffs, expected " +
                            std::to_string(j_claims));
    for (int j = 0; j < j_claims; ++j)
      out.space.payoffs(w, j) = finite_number(payoffs[j], "payoff entry");
  }
  const double psum = out.space.probs.sum();
  if (std::abs(psum - 1.0) > 1e-12)
    throw ValidationError("probabilities sum to " + fmt(psum) + ", outside tolerance");

  const auto& makers = doc.at("makers");
  if (!makers.is_array() || makers.empty())
    throw ValidationError("makers must be a non-empty array");
  out.space.m_makers = static_cast<int>(makers.size());
  for (const auto& mk : makers) {
    const auto& u = mk.at("utility");
    if (u.value("type", std::string()) != "exp_mixture")
      throw ValidationError("utility.type must be \"exp_mixture\"");
    const auto& terms = u.at("terms");
    if (!terms.is_array() || terms.empty())
      throw ValidationError("utility.terms must be a non-empty array");
    std::vector<ExpMixtureUtility::Term> parsed;
    parsed.reserve(terms.size());
    for (const auto& t : terms)
      parsed.push_back({finite_number(t.at("weight"), "term weight"),
                        finite_number(t.at("alpha"), "term alpha")});
    out.utilities.emplace_back(std::move(parsed));
  }

  out.initial_spec = parse_initial(doc.at("initial"), out.space.m_makers, out.space.n_states);
  out.risk_bound = economy_risk_bound(out.utilities);
  return out;
}

ScenarioDocument load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario file is not valid JSON: " + std::string(e.what()));
  }
  try {
    return load_scenario(doc);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario file is missing required fields: " + std::string(e.what()));
  }
}

nlohmann::json scenario_to_json(const ScenarioDocument& doc) {
  nlohmann::json out;
  out["states"] = nlohmann::json::array();
  for (int w = 0; w < doc.space.n_states; ++w) {
    nlohmann::json st;
    st["prob"] = doc.space.probs[w];
    st["payoffs"] = std::vector<double>(doc.space.payoffs.row(w).begin(),
                                        doc.space.payoffs.row(w).end());
    out["states"].push_back(std::move(st));
  }
  out["makers"] = nlohmann::json::array();
  for (const auto& u : doc.utilities) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : u.terms()) terms.push_back({{"weight", t.weight}, {"alpha", t.alpha}});
    out["makers"].push_back({{"utility", {{"type", "exp_mixture"}, {"terms", std::move(terms)}}}});
  }
  nlohmann::json initial;
  if (doc.initial_spec.mode == InitialSpec::Mode::weights) {
    initial["mode"] = "weights";
    initial["lambda"] = std::vector<double>(doc.initial_spec.lambda.begin(),
                                            doc.initial_spec.lambda.end());
    initial["sigma0"] = std::vector<double>(doc.initial_spec.sigma0.begin(),
                                            doc.initial_spec.sigma0.end());
  } else {
    initial["mode"] = "allocations";
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index m = 0; m < doc.initial_spec.alpha0.rows(); ++m)
      rows.push_back(std::vector<double>(doc.initial_spec.alpha0.row(m).begin(),
                                         doc.initial_spec.alpha0.row(m).end()));
    initial["alpha0"] = std::move(rows);
  }
  out["initial"] = std::move(initial);
  return out;
}

InitialState build_initial(const ScenarioSpace& space,
                           std::span<const ExpMixtureUtility> utilities,
                           const InitialSpec& spec) {
  const int m_count = space.m_makers;
  const int n = space.n_states;
  InitialState state;
  state.alpha0.resize(m_count, n);

  if (spec.mode == InitialSpec::Mode::weights) {
    if (spec.lambda.size() != m_count)
      throw ValidationError("lambda must list one weight per maker");
    for (int m = 0; m < m_count; ++m)
      if (!(spec.lambda[m] > 0.0))
        throw ValidationError("lambda entries must be strictly positive");
    if (std::abs(spec.lambda.sum() - 1.0) > 1e-12)
      throw ValidationError("lambda sums to " + std::to_string(spec.lambda.sum()) +
                            ", outside tolerance");
    state.lambda0 = spec.lambda;
    state.sigma0 = spec.sigma0;
    for (int w = 0; w < n; ++w) {
      const RepresentativeEval r =
          eval_representative(utilities, state.lambda0, state.sigma0[w]);
      state.alpha0.col(w) = r.alloc;
    }
  } else {
    // Recover the weights from the first state: at an efficient split the
    // weighted marginal utilities agree across makers, so the weights are
    // proportional to the inverse marginals.  Every other state must then
    // reproduce the same weights.
    state.alpha0 = spec.alpha0;
    state.sigma0 = spec.alpha0.colwise().sum().transpose();
    Eigen::MatrixXd inv_marginal(m_count, n);
    for (int w = 0; w < n; ++w)
      for (int m = 0; m < m_count; ++m)
        inv_marginal(m, w) = std::exp(-utilities[m].log_marginal(spec.alpha0(m, w)));
    state.lambda0 = inv_marginal.col(0) / inv_marginal.col(0).sum();
    double worst = 0.0;
    int worst_state = 0;
    for (int w = 0; w < n; ++w) {
      const Eigen::VectorXd lam = inv_marginal.col(w) / inv_marginal.col(w).sum();
      const double dev = ((lam - state.lambda0).cwiseQuotient(state.lambda0))
                             .cwiseAbs()
                             .maxCoeff();
      if (dev > worst) {
        worst = dev;
        worst_state = w;
      }
    }
    if (worst > 1e-8)
      throw ValidationError(
          "alpha0 is not an efficient allocation: implied weights deviate by " + fmt(worst) +
          " at state " + std::to_string(worst_state));
  }

  state.u0.resize(m_count);
  Eigen::VectorXd buf(n);
  for (int m = 0; m < m_count; ++m) {
    for (int w = 0; w < n; ++w) buf[w] = utilities[m].value(state.alpha0(m, w));
    state.u0[m] = expectation(space.probs, buf);
  }
  return state;
}

}  // namespace mip
