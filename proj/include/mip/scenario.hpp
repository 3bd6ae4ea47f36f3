#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mip/utility.hpp"

namespace mip {

// Finite scenario space: N states with strictly positive probabilities
// summing to one, and the payoff of each of the J securities in each state.
struct ScenarioSpace {
  int n_states = 0;
  int m_makers = 0;
  int j_claims = 0;
  Eigen::VectorXd probs;    // N
  Eigen::MatrixXd payoffs;  // N x J, row per state
};

// Raw description of the initial book, as given in the input file.
struct InitialSpec {
  enum class Mode { weights, allocations };
  Mode mode = Mode::weights;
  Eigen::VectorXd lambda;  // weights mode: M, interior of the simplex
  Eigen::VectorXd sigma0;  // weights mode: N, total initial endowment per state
  Eigen::MatrixXd alpha0;  // allocations mode: M x N, per-maker endowments
};

// Validated initial book.  alpha0 is the efficient split of sigma0 under the
// weights lambda0, and u0 holds each maker's expected utility of its share,
// the level the solver later preserves.
struct InitialState {
  Eigen::VectorXd sigma0;   // N
  Eigen::VectorXd lambda0;  // M
  Eigen::MatrixXd alpha0;   // M x N
  Eigen::VectorXd u0;       // M, strictly negative
};

struct ScenarioDocument {
  ScenarioSpace space;
  std::vector<ExpMixtureUtility> utilities;
  InitialSpec initial_spec;
  double risk_bound = 1.0;  // economy aversion envelope, cached at load
};

// Parse and validate a scenario.  Throws ValidationError with a message
// naming the offending field on any inconsistency.
ScenarioDocument load_scenario(const nlohmann::json& doc);
ScenarioDocument load_scenario_file(const std::string& path);

// Inverse of load_scenario: reproduces every number exactly on reload.
nlohmann::json scenario_to_json(const ScenarioDocument& doc);

// Build the initial book.  Weights mode splits sigma0 efficiently under
// lambda; allocations mode recovers the weights from the marginal utilities
// of the given split and rejects inputs that are not an efficient allocation.
InitialState build_initial(const ScenarioSpace& space,
                           std::span<const ExpMixtureUtility> utilities,
                           const InitialSpec& spec);

inline InitialState build_initial(const ScenarioDocument& doc) {
  return build_initial(doc.space, doc.utilities, doc.initial_spec);
}

}  // namespace mip
