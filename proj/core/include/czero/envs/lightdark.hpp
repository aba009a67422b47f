#pragma once

#include <array>
#include <cstddef>

#include "czero/envs/variant.hpp"
#include "czero/model.hpp"
#include "czero/types.hpp"
#include "czero/updaters.hpp"

namespace czero {

struct LightDarkState {
  double y = 0.0;
  bool terminated = false;
};

struct LightDarkParams {
  double light = 10.0;
  double goal_radius = 1.0;
  double stop_reward = 100.0;
  double init_mean = 2.0;
  double init_std = 2.0;
  double discount = 0.95;
  double target_threshold = 0.01;
  EnvVariant variant;

  void validate() const;
};

/// One-dimensional localization. Actions: up (+1), down (-1), stop.
/// Observations are y + N(0, sigma(y)^2) with sigma(y) = |y - light| + 1.
class LightDark {
 public:
  using State = LightDarkState;
  using Observation = double;

  static constexpr Action kUp = 0;
  static constexpr Action kDown = 1;
  static constexpr Action kStop = 2;

  explicit LightDark(LightDarkParams params = {});

  const LightDarkParams& params() const noexcept { return params_; }
  std::size_t num_actions() const noexcept { return 3; }
  double discount() const noexcept { return params_.discount; }
  double target_threshold() const noexcept { return params_.target_threshold; }

  Transition<State, Observation> step(const State& s, Action a, Rng& rng) const;
  bool is_failure(const State& s, Action a) const noexcept;
  bool is_terminal(const State& s) const noexcept { return s.terminated; }
  State sample_initial_state(Rng& rng) const;

  double noise_std(double y) const noexcept;
  double reward(const State& s, Action a) const noexcept;

  State sample_transition(const State& s, Action a, Rng& rng) const;
  double observation_log_likelihood(Observation o, Action a, const State& next) const;
  std::array<double, 1> features(const State& s) const noexcept { return {s.y}; }

 private:
  LightDarkParams params_;
};

/// The failure predicate on its own: stop outside the goal region.
bool lightdark_failure(const LightDarkState& s, Action a, double goal_radius = 1.0) noexcept;

using LightDarkUpdater = ParticleFilterUpdater<LightDark>;
using LightDarkMdp = BeliefMdpAdapter<LightDark, LightDarkUpdater>;

LightDarkMdp make_lightdark_mdp(const LightDarkParams& params, std::size_t n_particles = 500, std::size_t horizon = 60);

}  // namespace czero
