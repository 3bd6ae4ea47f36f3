#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mip {

// Malformed or inconsistent problem input (bad scenario file, dimension
// mismatch, parameters outside the admissible domain).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// An iterative solve failed to converge.  Carries the last residual and the
// iteration count so callers can report diagnostics.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

// Fixed-order pairwise reduction.  Short arrays are summed sequentially;
// longer ones split in half so accumulation error stays O(log n) and the
// result does not depend on any threading or chunking choices upstream.
double pairwise_sum(std::span<const double> xs);

// E[values] under the given probability weights, deterministic order.
double expectation(const Eigen::VectorXd& probs, const Eigen::VectorXd& values);

// One named result of a property check, with the worst margin seen.
// margin >= 0 means the property held with that much room to spare.
struct CheckItem {
  std::string name;
  bool pass = true;
  double margin = 0.0;
  std::string detail;
};

struct CheckReport {
  std::vector<CheckItem> items;
  bool pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
};

}  // namespace mip
