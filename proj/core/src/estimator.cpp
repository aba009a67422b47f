#include "czero/estimator.hpp"

namespace czero {

UniformEstimator::UniformEstimator(std::size_t num_actions) : num_actions_(num_actions) {
  if (num_actions_ == 0) throw ContractViolation("UniformEstimator: num_actions must be positive");
}

Estimate UniformEstimator::evaluate(std::span<const double>) const {
  return {std::vector<double>(num_actions_, 1.0 / static_cast<double>(num_actions_)), 0.0, 0.0};
}

Estimate NetEstimator::evaluate(std::span<const double> summary) const {
  auto out = net_->forward(summary);
  return {std::move(out.policy), out.value, out.failure};
}

}  // namespace czero
