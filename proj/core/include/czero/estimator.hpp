#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "czero/net.hpp"

namespace czero {

/// Network lookup used by the planner: prior over actions, value, and
/// failure probability of a belief summary.
struct Estimate {
  std::vector<double> policy;
  double value = 0.0;
  double failure = 0.0;
};

class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual Estimate evaluate(std::span<const double> summary) const = 0;
  /// False when evaluate() ignores its input, letting callers skip summarization.
  virtual bool uses_summary() const { return true; }
};

/// Uniform prior, zero value, zero failure. Stands in for the network when
/// planning without one.
class UniformEstimator final : public Estimator {
 public:
  explicit UniformEstimator(std::size_t num_actions);
  Estimate evaluate(std::span<const double> summary) const override;
  bool uses_summary() const override { return false; }

 private:
  std::size_t num_actions_;
};

/// Adapts a frozen TripleHeadNet; the net must outlive the adapter.
class NetEstimator final : public Estimator {
 public:
  explicit NetEstimator(const TripleHeadNet& net) : net_(&net) {}
  Estimate evaluate(std::span<const double> summary) const override;

 private:
  const TripleHeadNet* net_;
};

}  // namespace czero
