#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "czero/envs/variant.hpp"
#include "czero/model.hpp"
#include "czero/types.hpp"

namespace czero {

struct ToyBelief {
  int state = 0;
  std::size_t time = 0;
};

/// Three-state, two-action, horizon-2 fully observed CC-MDP.
///
///   s0 --a0--> s1, s0 --a1--> s2   (r = 0, p = 0)
///   s1: a0 -> r 1,  p 0      a1 -> r 5,  p 0.2
///   s2: a0 -> r 0,  p 0      a1 -> r 10, p 0.5
///
/// Penalty mode pays r - penalty * p.
class ToyCcMdp {
 public:
  using Belief = ToyBelief;

  struct Cell {
    int next = 0;
    double reward = 0.0;
    double failure = 0.0;
  };

  explicit ToyCcMdp(double target_threshold = 0.0, EnvVariant variant = {});

  std::size_t num_actions() const noexcept { return 2; }
  double discount() const noexcept { return 1.0; }
  double target_threshold() const noexcept { return target_threshold_; }
  std::size_t horizon() const noexcept { return 2; }
  const EnvVariant& variant() const noexcept { return variant_; }

  Belief initial_belief(Rng&) const noexcept { return {}; }
  BeliefTransition<Belief> step(const Belief& b, Action a, Rng& rng) const;
  bool is_terminal(const Belief& b) const noexcept { return b.time >= horizon(); }
  std::vector<double> summarize(const Belief& b) const;

  static const Cell& cell(int state, Action a);

 private:
  double target_threshold_;
  EnvVariant variant_;
};

/// A depth-2 deterministic policy: root action, then the action at the state it reaches.
struct ToyPolicyValue {
  Action first = 0;
  Action second = 0;
  double value = 0.0;
  double failure = 0.0;
};

/// All four policies with exact value and failure probability (p + (1 - p) p').
/// Values use the model's reward variant.
std::array<ToyPolicyValue, 4> toy_enumerate(const ToyCcMdp& mdp);

/// Highest-value policy with failure <= target_threshold (lowest actions on ties).
ToyPolicyValue toy_constrained_optimum(const ToyCcMdp& mdp);

}  // namespace czero
