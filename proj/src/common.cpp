#include "mip/common.hpp"

namespace mip {

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 64) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double expectation(const Eigen::VectorXd& probs, const Eigen::VectorXd& values) {
  Eigen::VectorXd prod = probs.cwiseProduct(values);
  return pairwise_sum(std::span<const double>(prod.data(), static_cast<std::size_t>(prod.size())));
}

}  // namespace mip
