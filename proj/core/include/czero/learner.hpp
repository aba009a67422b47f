#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "czero/estimator.hpp"
#include "czero/model.hpp"
#include "czero/net.hpp"
#include "czero/planner.hpp"
#include "czero/types.hpp"

namespace czero {

/// g_t = sum_{i >= t} gamma^(i - t) r_i.
std::vector<double> compute_returns(std::span<const double> rewards, double discount);

/// e_t = 1 if any step i >= t failed.
std::vector<int> label_failures(std::span<const char> step_failed);

/// Same, evaluating `failed(s, a)` along a (state, action) trajectory.
template <class State, class Pred>
std::vector<int> label_failures(const std::vector<std::pair<State, Action>>& trajectory, Pred&& failed) {
  std::vector<char> flags;
  flags.reserve(trajectory.size());
  for (const auto& [s, a] : trajectory) flags.push_back(failed(s, a) ? 1 : 0);
  return label_failures(flags);
}

/// Independent stream per (iteration, episode).
std::uint64_t episode_seed(std::uint64_t base, std::uint64_t iteration, std::uint64_t episode) noexcept;

struct Decision {
  Action action = 0;
  std::vector<double> policy;
};

struct EpisodeResult {
  std::vector<EpisodeSample> samples;
  std::vector<Action> actions;
  std::vector<double> rewards;
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
  bool failed = false;
  std::size_t degenerate_updates = 0;
};

namespace detail {

template <class M>
concept HiddenStateMdp = requires(const M& m) {
  m.pomdp();
  m.updater();
};

EpisodeResult finish_episode(std::vector<std::vector<double>> summaries, std::vector<std::vector<double>> policies,
                             std::vector<Action> actions, std::vector<double> rewards, std::vector<char> failed,
                             double discount);

}  // namespace detail

/// Rolls out one episode. `policy(belief, rng)` returns a Decision whose
/// `policy` is recorded as the training target.
///
/// For a POMDP cast as a belief MDP the hidden state is simulated alongside
/// the belief and failures are read from the state predicate. For a direct
/// belief MDP each step fails with its reported probability.
template <CcBeliefMdp M, class Policy>
EpisodeResult run_episode(const M& mdp, Policy&& policy, Rng& rng) {
  std::vector<std::vector<double>> summaries;
  std::vector<std::vector<double>> policies;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<char> failed;
  std::size_t degenerate = 0;

  auto record = [&](const auto& b, Decision d) {
    summaries.push_back(mdp.summarize(b));
    policies.push_back(std::move(d.policy));
    actions.push_back(d.action);
  };

  auto b = mdp.initial_belief(rng);
  if constexpr (detail::HiddenStateMdp<M>) {
    const auto& pomdp = mdp.pomdp();
    auto s = pomdp.sample_initial_state(rng);
    while (!mdp.is_terminal(b) && !pomdp.is_terminal(s)) {
      Decision d = policy(std::as_const(b), rng);
      const Action a = d.action;
      record(b, std::move(d));
      failed.push_back(pomdp.is_failure(s, a) ? 1 : 0);
      auto tr = pomdp.step(s, a, rng);
      rewards.push_back(tr.reward);
      s = std::move(tr.next);
      if (pomdp.is_terminal(s)) {
        b.terminal = true;
        b.time += 1;
      } else {
        auto upd = mdp.updater().update(b.belief, a, tr.observation, rng);
        if (upd.degenerate) ++degenerate;
        b.belief = std::move(upd.belief);
        b.time += 1;
      }
    }
  } else {
    while (!mdp.is_terminal(b)) {
      Decision d = policy(std::as_const(b), rng);
      const Action a = d.action;
      record(b, std::move(d));
      auto tr = mdp.step(b, a, rng);
      std::bernoulli_distribution fail(tr.failure_probability);
      failed.push_back(fail(rng) ? 1 : 0);
      rewards.push_back(tr.reward);
      b = std::move(tr.next);
    }
  }
  auto result = detail::finish_episode(std::move(summaries), std::move(policies), std::move(actions),
                                       std::move(rewards), std::move(failed), mdp.discount());
  result.degenerate_updates = degenerate;
  return result;
}

/// One planning episode: Delta-MCTS at every step, tree policy as target.
template <CcBeliefMdp M>
EpisodeResult collect_episode(const M& mdp, const Estimator& estimator, const PlannerConfig& config, Rng& rng) {
  DeltaMcts<M> planner(mdp, estimator, config);
  return run_episode(
      mdp,
      [&](const typename M::Belief& b, Rng& r) {
        auto res = planner.plan(b, r);
        return Decision{res.action, std::move(res.tree_policy)};
      },
      rng);
}

/// Runs fn(0..n-1) on `workers` threads and returns the completed results in
/// index order. Failures are logged to stderr and skipped; throws
/// std::runtime_error if fewer than `min_completion` of them finish.
std::vector<EpisodeResult> run_parallel(std::size_t n, std::size_t workers,
                                        const std::function<EpisodeResult(std::size_t)>& fn,
                                        double min_completion = 0.8);

template <CcBeliefMdp M>
std::vector<EpisodeResult> collect_data(const M& mdp, const Estimator& estimator, const PlannerConfig& config,
                                        std::size_t n_data, std::size_t workers, std::uint64_t base_seed,
                                        std::uint64_t iteration) {
  if (n_data == 0) throw ContractViolation("collect_data: n_data must be positive");
  return run_parallel(n_data, workers, [&](std::size_t i) {
    Rng rng(episode_seed(base_seed, iteration, i));
    return collect_episode(mdp, estimator, config, rng);
  });
}

/// Keeps the sample blocks of the most recent `window` iterations.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t window);
  void push(std::vector<EpisodeSample> block);
  std::size_t window() const noexcept { return window_; }
  std::size_t num_blocks() const noexcept { return blocks_.size(); }
  const std::deque<std::vector<EpisodeSample>>& blocks() const noexcept { return blocks_; }
  std::vector<EpisodeSample> samples() const;

 private:
  std::size_t window_;
  std::deque<std::vector<EpisodeSample>> blocks_;
};

struct MeanStderr {
  double mean = 0.0;
  double sem = 0.0;
};

/// Sample mean and standard error std / sqrt(n) (Bessel-corrected); 0 for n = 1.
MeanStderr mean_stderr(std::span<const double> xs);

struct LearnerConfig {
  std::size_t n_iterations = 10;
  std::size_t n_data = 100;
  std::size_t workers = 1;
  std::size_t buffer_window = 1;
  std::uint64_t seed = 0;
  PlannerConfig planner;
  TrainSpec train;
  bool record_wall_time = true;

  void validate() const;
};

struct IterationMetrics {
  std::size_t iteration = 0;
  double mean_return = 0.0;
  double stderr_return = 0.0;
  double p_fail = 0.0;
  double stderr_pfail = 0.0;
  LossBreakdown loss;
  double wall_s = 0.0;
  std::size_t episodes = 0;
  std::size_t degenerate_updates = 0;
};

/// Return and failure statistics over a batch of episodes.
IterationMetrics summarize_episodes(std::span<const EpisodeResult> episodes);

/// Called after each iteration with its metrics and the freshly trained net.
using IterationCallback = std::function<void(const IterationMetrics&, const TripleHeadNet&)>;

std::uint64_t training_seed(std::uint64_t base, std::uint64_t iteration) noexcept;

/// Alternates parallel Delta-MCTS collection with the frozen net and fitting
/// the net on the replay buffer. Metrics of iteration i describe the episodes
/// collected with the net produced by iteration i - 1.
template <CcBeliefMdp M>
std::vector<IterationMetrics> policy_iteration(const M& mdp, TripleHeadNet& net, const LearnerConfig& config,
                                               const IterationCallback& on_iteration = {}) {
  config.validate();
  ReplayBuffer buffer(config.buffer_window);
  std::vector<IterationMetrics> history;
  for (std::size_t it = 0; it < config.n_iterations; ++it) {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<EpisodeResult> episodes;
    {
      const NetEstimator estimator(net);
      episodes = collect_data(mdp, estimator, config.planner, config.n_data, config.workers, config.seed, it);
    }
    IterationMetrics m = summarize_episodes(episodes);
    m.iteration = it;

    std::vector<EpisodeSample> block;
    for (auto& e : episodes)
      for (auto& s : e.samples) block.push_back(std::move(s));
    buffer.push(std::move(block));

    const auto data = buffer.samples();
    if (!data.empty()) {
      Rng rng(training_seed(config.seed, it));
      const auto losses = fit(net, data, config.train, rng);
      if (!losses.empty()) m.loss = losses.back();
    }
    if (config.record_wall_time)
      m.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    history.push_back(m);
    if (on_iteration) on_iteration(m, net);
  }
  return history;
}

}  // namespace czero
