#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "czero/estimator.hpp"
#include "czero/learner.hpp"
#include "czero/net.hpp"
#include "czero/planner.hpp"

namespace czero {

enum class EvalMode { Full, NoAdaptation, DmctsNoNet, RawPolicy, RawValue, RawFailure };

std::optional<EvalMode> parse_eval_mode(std::string_view name);
std::string_view to_string(EvalMode mode);

struct EpisodeOutcome {
  double ret = 0.0;
  bool failed = false;
};

struct EvalReport {
  std::vector<EpisodeOutcome> episodes;
  double mean_return = 0.0;
  double stderr_return = 0.0;
  double p_fail = 0.0;
  double stderr_pfail = 0.0;
};

EvalReport make_report(std::vector<EpisodeOutcome> episodes);

/// Seed stream for evaluation episodes, disjoint from training iterations.
inline constexpr std::uint64_t kEvalStream = std::numeric_limits<std::uint64_t>::max();

inline constexpr std::size_t kLookaheadDraws = 5;

/// Argmax of the policy head.
Action argmax_action(std::span<const double> policy);

/// One-step lookahead scoring each action by the mean of r + gamma V(b')
/// over `draws` generative samples; lowest action on ties.
template <CcBeliefMdp M>
Action lookahead_by_value(const M& mdp, const TripleHeadNet& net, const typename M::Belief& b, std::size_t draws,
                          Rng& rng) {
  Action best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (Action a = 0; a < mdp.num_actions(); ++a) {
    double score = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto tr = mdp.step(b, a, rng);
      const double v = mdp.is_terminal(tr.next) ? 0.0 : net.forward(mdp.summarize(tr.next)).value;
      score += tr.reward + mdp.discount() * v;
    }
    score /= static_cast<double>(draws);
    if (score > best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

/// One-step lookahead picking the action with the smallest mean of
/// p + delta (1 - p) F_theta(b'); lowest action on ties.
template <CcBeliefMdp M>
Action lookahead_by_failure(const M& mdp, const TripleHeadNet& net, const typename M::Belief& b, std::size_t draws,
                            double failure_discount, Rng& rng) {
  Action best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (Action a = 0; a < mdp.num_actions(); ++a) {
    double score = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      const auto tr = mdp.step(b, a, rng);
      const double f = mdp.is_terminal(tr.next) ? 0.0 : net.forward(mdp.summarize(tr.next)).failure;
      score += compose_failure_prob(tr.failure_probability, f, failure_discount);
    }
    score /= static_cast<double>(draws);
    if (score < best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

/// Runs `n_episodes` evaluation episodes in the given mode. Planning modes
/// select actions by argmax (temperature 0).
template <CcBeliefMdp M>
EvalReport evaluate(const M& mdp, const TripleHeadNet& net, PlannerConfig config, EvalMode mode,
                    std::size_t n_episodes, std::uint64_t seed, std::size_t workers = 1) {
  if (n_episodes == 0) throw ContractViolation("evaluate: n_episodes must be positive");
  config.temperature = 0.0;
  if (mode == EvalMode::NoAdaptation) {
    config.adaptation = false;
    config.aci_step = 0.0;
  }
  const NetEstimator net_estimator(net);
  const UniformEstimator uniform(mdp.num_actions());
  const Estimator& estimator = mode == EvalMode::DmctsNoNet ? static_cast<const Estimator&>(uniform) : net_estimator;

  auto one_hot = [&](Action a) {
    std::vector<double> p(mdp.num_actions(), 0.0);
    p[a] = 1.0;
    return Decision{a, std::move(p)};
  };

  const auto results = run_parallel(n_episodes, workers, [&](std::size_t i) {
    Rng rng(episode_seed(seed, kEvalStream, i));
    switch (mode) {
      case EvalMode::Full:
      case EvalMode::NoAdaptation:
      case EvalMode::DmctsNoNet:
        return collect_episode(mdp, estimator, config, rng);
      case EvalMode::RawPolicy:
        return run_episode(
            mdp, [&](const typename M::Belief& b, Rng&) { return one_hot(argmax_action(net.forward(mdp.summarize(b)).policy)); },
            rng);
      case EvalMode::RawValue:
        return run_episode(
            mdp, [&](const typename M::Belief& b, Rng& r) { return one_hot(lookahead_by_value(mdp, net, b, kLookaheadDraws, r)); },
            rng);
      case EvalMode::RawFailure:
        return run_episode(
            mdp,
            [&](const typename M::Belief& b, Rng& r) {
              return one_hot(lookahead_by_failure(mdp, net, b, kLookaheadDraws, config.failure_discount, r));
            },
            rng);
    }
    throw ContractViolation("evaluate: unknown mode");
  });

  std::vector<EpisodeOutcome> outcomes;
  outcomes.reserve(results.size());
  for (const auto& r : results) outcomes.push_back({r.discounted_return, r.failed});
  return make_report(std::move(outcomes));
}

}  // namespace czero
