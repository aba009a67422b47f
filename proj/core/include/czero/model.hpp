#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <utility>
#include <vector>

#include "czero/belief.hpp"
#include "czero/types.hpp"

namespace czero {

/// Output of the generative POMDP step (s', r, o) ~ G(s, a).
template <class State, class Observation>
struct Transition {
  State next;
  double reward = 0.0;
  Observation observation;
};

/// Generative chance-constrained POMDP. The failure set is a lazily evaluated
/// state-action predicate.
template <class M>
concept CcPomdp = requires(const M& m, const typename M::State& s, Action a, Rng& rng) {
  typename M::State;
  typename M::Observation;
  { m.num_actions() } -> std::convertible_to<std::size_t>;
  { m.discount() } -> std::convertible_to<double>;
  { m.target_threshold() } -> std::convertible_to<double>;
  { m.step(s, a, rng) } -> std::same_as<Transition<typename M::State, typename M::Observation>>;
  { m.is_failure(s, a) } -> std::convertible_to<bool>;
  { m.is_terminal(s) } -> std::convertible_to<bool>;
  { m.sample_initial_state(rng) } -> std::same_as<typename M::State>;
};

/// Output of the belief-level generative step (b', r, p) ~ G_b(b, a).
template <class Belief>
struct BeliefTransition {
  Belief next;
  double reward = 0.0;
  double failure_probability = 0.0;
};

/// Generative chance-constrained belief MDP, the interface the planner consumes.
template <class M>
concept CcBeliefMdp = requires(const M& m, const typename M::Belief& b, Action a, Rng& rng) {
  typename M::Belief;
  { m.num_actions() } -> std::convertible_to<std::size_t>;
  { m.discount() } -> std::convertible_to<double>;
  { m.target_threshold() } -> std::convertible_to<double>;
  { m.step(b, a, rng) } -> std::same_as<BeliefTransition<typename M::Belief>>;
  { m.is_terminal(b) } -> std::convertible_to<bool>;
  { m.summarize(b) } -> std::same_as<std::vector<double>>;
};

/// Result of a belief update; `degenerate` flags a filter reset.
template <class Belief>
struct UpdateResult {
  Belief belief;
  bool degenerate = false;
};

/// Bayesian belief updater bound to a POMDP. Also supplies the belief-level
/// quantities the CC-BMDP needs: state sampling, F_b, and the network summary.
template <class U, class P>
concept BeliefUpdater = CcPomdp<P> &&
    requires(const U& u, const typename U::Belief& b, Action a, const typename P::Observation& o, Rng& rng) {
  typename U::Belief;
  { u.initial_belief(rng) } -> std::same_as<typename U::Belief>;
  { u.update(b, a, o, rng) } -> std::same_as<UpdateResult<typename U::Belief>>;
  { u.sample_state(b, rng) } -> std::same_as<typename P::State>;
  { u.failure_probability(b, a) } -> std::convertible_to<double>;
  { u.summarize(b) } -> std::same_as<std::vector<double>>;
};

/// Checks the scalar parameters every CC model carries.
void validate_model_parameters(std::size_t num_actions, double discount, double target_threshold);

/// R_b(b, a) = sum_i w_i R(s_i, a).
template <class State, class RewardFn>
double belief_reward(const ParticleBelief<State>& b, Action a, RewardFn&& reward) {
  require_normalized(b.weights());
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) total += b.weights()[i] * reward(b.particles()[i], a);
  return total;
}

/// F_b(b, a) = sum_i w_i 1{(s_i, a) in F}.
template <class State, class FailurePredicate>
double immediate_failure_probability(const ParticleBelief<State>& b, Action a, FailurePredicate&& failed) {
  require_normalized(b.weights());
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (failed(b.particles()[i], a)) total += b.weights()[i];
  return std::min(1.0, std::max(0.0, total));
}

/// Planning node payload for a POMDP cast as a belief MDP: the updater's
/// belief plus the bookkeeping needed to decide belief terminality.
template <class UBelief>
struct BeliefState {
  UBelief belief;
  std::size_t time = 0;
  bool terminal = false;
};

/// CC-BMDP view of a CC-POMDP: sample s ~ b, (s', r, o) ~ G(s, a),
/// b' = update(b, a, o), p = F_b(b, a) on the pre-transition belief.
/// A belief is terminal once the sampled hidden state terminates or the
/// episode horizon is exhausted.
template <CcPomdp P, BeliefUpdater<P> U>
class BeliefMdpAdapter {
 public:
  using Pomdp = P;
  using Updater = U;
  using Belief = BeliefState<typename U::Belief>;

  BeliefMdpAdapter(P pomdp, U updater, std::size_t horizon)
      : pomdp_(std::move(pomdp)), updater_(std::move(updater)), horizon_(horizon) {
    validate_model_parameters(pomdp_.num_actions(), pomdp_.discount(), pomdp_.target_threshold());
  }

  std::size_t num_actions() const { return pomdp_.num_actions(); }
  double discount() const { return pomdp_.discount(); }
  double target_threshold() const { return pomdp_.target_threshold(); }
  std::size_t horizon() const noexcept { return horizon_; }

  const P& pomdp() const noexcept { return pomdp_; }
  const U& updater() const noexcept { return updater_; }

  Belief initial_belief(Rng& rng) const { return Belief{updater_.initial_belief(rng), 0, false}; }

  bool is_terminal(const Belief& b) const { return b.terminal || b.time >= horizon_; }

  std::vector<double> summarize(const Belief& b) const { return updater_.summarize(b.belief); }

  BeliefTransition<Belief> step(const Belief& b, Action a, Rng& rng) const {
    const double p = updater_.failure_probability(b.belief, a);
    const auto s = updater_.sample_state(b.belief, rng);
    auto tr = pomdp_.step(s, a, rng);
    const bool terminal = pomdp_.is_terminal(tr.next);
    Belief next{terminal ? b.belief : updater_.update(b.belief, a, tr.observation, rng).belief, b.time + 1,
                terminal};
    return {std::move(next), tr.reward, p};
  }

 private:
  P pomdp_;
  U updater_;
  std::size_t horizon_;
};

template <CcPomdp P, BeliefUpdater<P> U>
BeliefMdpAdapter<P, U> to_belief_mdp(P pomdp, U updater, std::size_t horizon) {
  return BeliefMdpAdapter<P, U>(std::move(pomdp), std::move(updater), horizon);
}

}  // namespace czero
