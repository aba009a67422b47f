#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "czero/envs/variant.hpp"
#include "czero/kalman.hpp"
#include "czero/model.hpp"
#include "czero/types.hpp"

namespace czero {

/// Encounter state relative to the intruder. `a_prev` stays empty until the
/// first nonzero advisory.
struct CasState {
  double h = 0.0;
  double hdot = 0.0;
  std::optional<Action> a_prev;
  int tau = 0;
};

struct CasParams {
  double dt = 1.0;
  double rate = 5.0;
  double sigma_intruder = 2.0;
  double sigma_h = 10.0;
  double sigma_hdot = 2.0;
  double h0_std = 100.0;
  double hdot0_std = 2.0;
  int tau0 = 40;
  double nmac_altitude = 50.0;
  double alert_cost = 1.0;
  double discount = 1.0;
  double target_threshold = 0.01;
  EnvVariant variant;

  void validate() const;
};

/// Vertical collision avoidance with advisories {-rate, 0, +rate} (indices 0, 1, 2).
/// An NMAC is |h| <= nmac_altitude at tau = 0; it is charged to the action
/// that steps from tau = 1 to tau = 0.
class Cas {
 public:
  using State = CasState;
  using Observation = std::array<double, 2>;

  static constexpr Action kDescend = 0;
  static constexpr Action kLevel = 1;
  static constexpr Action kClimb = 2;

  explicit Cas(CasParams params = {});

  const CasParams& params() const noexcept { return params_; }
  std::size_t num_actions() const noexcept { return 3; }
  double discount() const noexcept { return params_.discount; }
  double target_threshold() const noexcept { return params_.target_threshold; }

  /// Vertical rate commanded by an action, in m/s.
  double action_rate(Action a) const;

  Transition<State, Observation> step(const State& s, Action a, Rng& rng) const;
  bool is_failure(const State& s, Action a) const;
  bool is_terminal(const State& s) const noexcept { return s.tau <= 0; }
  State sample_initial_state(Rng& rng) const;

  /// Alert and reversal costs of taking `a` after `a_prev`.
  double alert_reward(const std::optional<Action>& a_prev, Action a) const;
  std::optional<Action> next_a_prev(const std::optional<Action>& a_prev, Action a) const;

  /// Kalman model of one step under action `a`, starting from `a_prev`.
  LinearGaussianModel linear_model(const std::optional<Action>& a_prev, Action a) const;

 private:
  CasParams params_;
};

/// NMAC predicate on the state itself.
bool cas_failure(const CasState& s, Action a, double nmac_altitude = 50.0) noexcept;

/// Gaussian belief over (h, hdot, a_prev rate, tau). a_prev and tau are known
/// exactly and also carried outside the filter.
struct CasBelief {
  GaussianBelief gaussian;
  std::optional<Action> a_prev;
  int tau = 0;
};

class CasKalmanUpdater {
 public:
  using Belief = CasBelief;

  explicit CasKalmanUpdater(Cas model) : model_(std::move(model)) {}

  Belief initial_belief(Rng& rng) const;
  UpdateResult<Belief> update(const Belief& b, Action a, const Cas::Observation& o, Rng& rng) const;
  CasState sample_state(const Belief& b, Rng& rng) const;
  /// Exact NMAC probability of the step from tau = 1; zero otherwise.
  double failure_probability(const Belief& b, Action a) const;
  std::vector<double> summarize(const Belief& b) const;

 private:
  Cas model_;
};

using CasMdp = BeliefMdpAdapter<Cas, CasKalmanUpdater>;

CasMdp make_cas_mdp(const CasParams& params, std::size_t horizon = 41);

}  // namespace czero
