#include "czero/learner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>

namespace czero {

std::vector<double> compute_returns(std::span<const double> rewards, double discount) {
  if (rewards.empty()) throw ContractViolation("compute_returns: empty reward list");
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + discount * acc;
    g[i] = acc;
  }
  return g;
}

std::vector<int> label_failures(std::span<const char> step_failed) {
  if (step_failed.empty()) throw ContractViolation("label_failures: empty trajectory");
  std::vector<int> e(step_failed.size());
  int acc = 0;
  for (std::size_t i = step_failed.size(); i-- > 0;) {
    acc = std::max(acc, step_failed[i] ? 1 : 0);
    e[i] = acc;
  }
  return e;
}

std::uint64_t episode_seed(std::uint64_t base, std::uint64_t iteration, std::uint64_t episode) noexcept {
  return base ^ mix_seed(mix_seed(iteration) ^ (episode + 0x632be59bd9b4e019ULL));
}

std::uint64_t training_seed(std::uint64_t base, std::uint64_t iteration) noexcept {
  return mix_seed(base ^ mix_seed(iteration ^ 0xa0761d6478bd642fULL));
}

namespace detail {

EpisodeResult finish_episode(std::vector<std::vector<double>> summaries, std::vector<std::vector<double>> policies,
                             std::vector<Action> actions, std::vector<double> rewards, std::vector<char> failed,
                             double discount) {
  EpisodeResult r;
  r.actions = std::move(actions);
  if (rewards.empty()) return r;
  const auto g = compute_returns(rewards, discount);
  const auto e = label_failures(failed);
  r.samples.reserve(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t)
    r.samples.push_back({std::move(summaries[t]), std::move(policies[t]), g[t], e[t]});
  for (double x : rewards) r.undiscounted_return += x;
  r.discounted_return = g.front();
  r.failed = e.front() != 0;
  r.rewards = std::move(rewards);
  return r;
}

}  // namespace detail

std::vector<EpisodeResult> run_parallel(std::size_t n, std::size_t workers,
                                        const std::function<EpisodeResult(std::size_t)>& fn, double min_completion) {
  std::vector<std::optional<EpisodeResult>> slots(n);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        slots[i] = fn(i);
      } catch (const std::exception& ex) {
        std::lock_guard lock(log_mutex);
        std::cerr << "episode " << i << " failed: " << ex.what() << '\n';
      }
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (nthreads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(work);
  }
  std::vector<EpisodeResult> out;
  out.reserve(n);
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  if (static_cast<double>(out.size()) < min_completion * static_cast<double>(n))
    throw std::runtime_error("only " + std::to_string(out.size()) + " of " + std::to_string(n) +
                             " episodes completed");
  return out;
}

ReplayBuffer::ReplayBuffer(std::size_t window) : window_(window) {
  if (window_ == 0) throw ContractViolation("ReplayBuffer: window must be positive");
}

void ReplayBuffer::push(std::vector<EpisodeSample> block) {
  blocks_.push_back(std::move(block));
  while (blocks_.size() > window_) blocks_.pop_front();
}

std::vector<EpisodeSample> ReplayBuffer::samples() const {
  std::vector<EpisodeSample> out;
  for (const auto& b : blocks_) out.insert(out.end(), b.begin(), b.end());
  return out;
}

MeanStderr mean_stderr(std::span<const double> xs) {
  if (xs.empty()) throw ContractViolation("mean_stderr: empty sample");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

void LearnerConfig::validate() const {
  if (n_data == 0) throw ContractViolation("LearnerConfig: n_data must be positive");
  if (workers == 0) throw ContractViolation("LearnerConfig: workers must be positive");
  if (buffer_window == 0) throw ContractViolation("LearnerConfig: buffer_window must be positive");
  planner.validate();
  train.validate();
}

IterationMetrics summarize_episodes(std::span<const EpisodeResult> episodes) {
  IterationMetrics m;
  m.episodes = episodes.size();
  if (episodes.empty()) return m;
  std::vector<double> returns;
  std::vector<double> fails;
  for (const auto& e : episodes) {
    returns.push_back(e.discounted_return);
    fails.push_back(e.failed ? 1.0 : 0.0);
    m.degenerate_updates += e.degenerate_updates;
  }
  const auto r = mean_stderr(returns);
  const auto f = mean_stderr(fails);
  m.mean_return = r.mean;
  m.stderr_return = r.sem;
  m.p_fail = f.mean;
  m.stderr_pfail = f.sem;
  return m;
}

}  // namespace czero
