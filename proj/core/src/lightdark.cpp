#include "czero/envs/lightdark.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace czero {

void LightDarkParams::validate() const {
  validate_model_parameters(3, discount, target_threshold);
  if (!(goal_radius >= 0.0)) throw ContractViolation("LightDark: goal_radius must be nonnegative");
  if (!(init_std > 0.0)) throw ContractViolation("LightDark: init_std must be positive");
  variant.validate();
}

LightDark::LightDark(LightDarkParams params) : params_(params) { params_.validate(); }

bool lightdark_failure(const LightDarkState& s, Action a, double goal_radius) noexcept {
  return a == LightDark::kStop && std::abs(s.y) > goal_radius;
}

bool LightDark::is_failure(const State& s, Action a) const noexcept {
  return lightdark_failure(s, a, params_.goal_radius);
}

double LightDark::noise_std(double y) const noexcept { return std::abs(y - params_.light) + 1.0; }

double LightDark::reward(const State& s, Action a) const noexcept {
  if (a != kStop) return 0.0;
  const bool inside = std::abs(s.y) <= params_.goal_radius;
  return (inside ? params_.stop_reward : 0.0) - params_.variant.failure_cost(!inside);
}

LightDark::State LightDark::sample_transition(const State& s, Action a, Rng&) const {
  if (a >= num_actions()) throw ContractViolation("LightDark: action out of range");
  switch (a) {
    case kUp:
      return {s.y + 1.0, false};
    case kDown:
      return {s.y - 1.0, false};
    default:
      return {s.y, true};
  }
}

double LightDark::observation_log_likelihood(Observation o, Action, const State& next) const {
  const double sd = noise_std(next.y);
  const double z = (o - next.y) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

Transition<LightDark::State, LightDark::Observation> LightDark::step(const State& s, Action a, Rng& rng) const {
  if (s.terminated) throw ContractViolation("LightDark: step after termination");
  auto next = sample_transition(s, a, rng);
  std::normal_distribution<double> noise(0.0, noise_std(next.y));
  const double o = next.y + noise(rng);
  return {next, reward(s, a), o};
}

LightDark::State LightDark::sample_initial_state(Rng& rng) const {
  std::normal_distribution<double> d(params_.init_mean, params_.init_std);
  return {d(rng), false};
}

LightDarkMdp make_lightdark_mdp(const LightDarkParams& params, std::size_t n_particles, std::size_t horizon) {
  LightDark pomdp(params);
  return to_belief_mdp(pomdp, LightDarkUpdater(pomdp, n_particles), horizon);
}

}  // namespace czero
