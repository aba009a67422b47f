#pragma once

#include "czero/types.hpp"

namespace czero {

enum class RewardMode { ChanceConstrained, Penalty };

/// Chance-constrained rewards, or the scalarized variant that subtracts
/// `penalty` whenever the failure predicate fires.
struct EnvVariant {
  RewardMode mode = RewardMode::ChanceConstrained;
  double penalty = 0.0;

  void validate() const {
    if (!(penalty >= 0.0)) throw ContractViolation("EnvVariant: penalty must be nonnegative");
  }
  double failure_cost(bool failed) const noexcept {
    return mode == RewardMode::Penalty && failed ? penalty : 0.0;
  }
};

}  // namespace czero
