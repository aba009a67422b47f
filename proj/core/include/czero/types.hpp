#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace czero {

using Action = std::size_t;

// All stochasticity goes through an explicitly passed engine.
using Rng = std::mt19937_64;

/// Raised when a caller breaks a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised by the particle filter when every particle has zero likelihood.
class DegenerateFilterError : public std::runtime_error {
 public:
  DegenerateFilterError(Action action, std::string observation)
      : std::runtime_error("particle filter degenerate: zero total likelihood for action " +
                           std::to_string(action) + ", observation " + observation),
        action_(action),
        observation_(std::move(observation)) {}

  Action action() const noexcept { return action_; }
  const std::string& observation() const noexcept { return observation_; }

 private:
  Action action_;
  std::string observation_;
};

/// Raised by the Kalman filter on a singular innovation covariance.
class FilterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Splitmix64 finalizer; used to derive independent per-episode seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace czero
