#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "czero/types.hpp"

namespace czero {

inline constexpr double kWeightTolerance = 1e-9;

/// Weighted particle approximation of a belief over `State`.
template <class State>
class ParticleBelief {
 public:
  ParticleBelief() = default;

  /// Uniformly weighted particle set.
  explicit ParticleBelief(std::vector<State> particles)
      : particles_(std::move(particles)),
        weights_(particles_.size(), particles_.empty() ? 0.0 : 1.0 / static_cast<double>(particles_.size())) {
    validate();
  }

  ParticleBelief(std::vector<State> particles, std::vector<double> weights)
      : particles_(std::move(particles)), weights_(std::move(weights)) {
    validate();
  }

  std::size_t size() const noexcept { return particles_.size(); }
  const std::vector<State>& particles() const noexcept { return particles_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const State& particle(std::size_t i) const { return particles_.at(i); }
  double weight(std::size_t i) const { return weights_.at(i); }

 private:
  void validate() const {
    if (particles_.empty()) throw ContractViolation("ParticleBelief: at least one particle required");
    if (particles_.size() != weights_.size())
      throw ContractViolation("ParticleBelief: particle/weight length mismatch");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ContractViolation("ParticleBelief: negative or non-finite weight");
      total += w;
    }
    if (std::abs(total - 1.0) > kWeightTolerance) throw ContractViolation("ParticleBelief: weights do not sum to 1");
  }

  std::vector<State> particles_;
  std::vector<double> weights_;
};

/// Throws unless the weights sum to one within kWeightTolerance.
inline void require_normalized(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw ContractViolation("belief weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) throw ContractViolation("belief weights are not normalized");
}

/// Draws a particle index proportionally to weight.
template <class State>
std::size_t sample_index(const ParticleBelief<State>& b, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  double acc = 0.0;
  const auto& w = b.weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    acc += w[i];
    if (u < acc) return i;
  }
  // u landed in the rounding gap above the cumulative sum; take the last positive weight.
  for (std::size_t i = w.size(); i-- > 0;)
    if (w[i] > 0.0) return i;
  return w.size() - 1;
}

template <class State>
const State& sample_state(const ParticleBelief<State>& b, Rng& rng) {
  return b.particles()[sample_index(b, rng)];
}

/// Per-dimension weighted mean followed by per-dimension weighted (population) standard deviation.
/// `features` maps a state to a fixed-length range of doubles.
template <class State, class Features>
std::vector<double> summarize(const ParticleBelief<State>& b, Features&& features) {
  const auto& ps = b.particles();
  const auto& ws = b.weights();
  const auto first = features(ps.front());
  const std::size_t dim = std::size(first);
  std::vector<double> mean(dim, 0.0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto f = features(ps[i]);
    std::size_t j = 0;
    for (double v : f) mean[j++] += ws[i] * v;
  }
  std::vector<double> var(dim, 0.0);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto f = features(ps[i]);
    std::size_t j = 0;
    for (double v : f) {
      const double d = v - mean[j];
      var[j++] += ws[i] * d * d;
    }
  }
  std::vector<double> out;
  out.reserve(2 * dim);
  out.insert(out.end(), mean.begin(), mean.end());
  for (double v : var) out.push_back(std::sqrt(std::max(v, 0.0)));
  return out;
}

/// Summary of a scalar-valued particle belief: (mean, std).
inline std::vector<double> summarize(const ParticleBelief<double>& b) {
  return summarize(b, [](double x) { return std::array<double, 1>{x}; });
}

}  // namespace czero
