#include "czero/model.hpp"

#include <string>

namespace czero {

void validate_model_parameters(std::size_t num_actions, double discount, double target_threshold) {
  if (num_actions == 0) throw ContractViolation("model: action space must be nonempty");
  if (!(discount >= 0.0 && discount <= 1.0))
    throw ContractViolation("model: discount must lie in [0, 1], got " + std::to_string(discount));
  if (!(target_threshold >= 0.0 && target_threshold <= 1.0))
    throw ContractViolation("model: target threshold must lie in [0, 1], got " + std::to_string(target_threshold));
}

}  // namespace czero
