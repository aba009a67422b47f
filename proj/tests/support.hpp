#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <czero/model.hpp>
#include <czero/net.hpp>
#include <czero/types.hpp>

namespace czero::testing {

/// Five-cell corridor: action 0 moves right, 1 moves left, each with
/// probability 0.8 (otherwise stays), clamped to [0, 4]. Observations are
/// x + N(0, sd(x)^2) with the smallest noise at cell 4.
struct Corridor {
  using State = int;
  using Observation = double;

  static constexpr int kCells = 5;

  std::size_t num_actions() const { return 2; }
  double discount() const { return 1.0; }
  double target_threshold() const { return 0.0; }

  static double noise_sd(int x) { return 0.5 * std::abs(x - 4) + 0.5; }

  static double transition_prob(int to, int from, Action a) {
    const int moved = std::clamp(from + (a == 0 ? 1 : -1), 0, kCells - 1);
    double p = 0.0;
    if (to == moved) p += 0.8;
    if (to == from) p += 0.2;
    return p;
  }

  int sample_transition(int s, Action a, Rng& rng) const {
    std::bernoulli_distribution move(0.8);
    return move(rng) ? std::clamp(s + (a == 0 ? 1 : -1), 0, kCells - 1) : s;
  }

  double observation_log_likelihood(double o, Action, int s) const {
    const double sd = noise_sd(s);
    const double z = (o - s) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
  }

  Transition<int, double> step(int s, Action a, Rng& rng) const {
    const int next = sample_transition(s, a, rng);
    std::normal_distribution<double> noise(0.0, noise_sd(next));
    return {next, 0.0, next + noise(rng)};
  }
  bool is_failure(int s, Action) const { return s == 0; }
  bool is_terminal(int) const { return false; }
  int sample_initial_state(Rng& rng) const {
    std::uniform_int_distribution<int> d(0, kCells - 1);
    return d(rng);
  }
  std::array<double, 1> features(int s) const { return {static_cast<double>(s)}; }
};

/// Exact forward-algorithm step on the corridor.
inline std::vector<double> corridor_forward(const std::vector<double>& prior, Action a, double o) {
  const Corridor m;
  std::vector<double> post(Corridor::kCells, 0.0);
  double total = 0.0;
  for (int to = 0; to < Corridor::kCells; ++to) {
    double pred = 0.0;
    for (int from = 0; from < Corridor::kCells; ++from)
      pred += Corridor::transition_prob(to, from, a) * prior[static_cast<std::size_t>(from)];
    post[static_cast<std::size_t>(to)] = pred * std::exp(m.observation_log_likelihood(o, a, to));
    total += post[static_cast<std::size_t>(to)];
  }
  for (double& p : post) p /= total;
  return post;
}

/// Two-state chain: the state never changes; observation 1 with probability
/// 0.9 in state 1 and 0.2 in state 0.
struct TwoState {
  using State = int;
  using Observation = int;

  std::size_t num_actions() const { return 1; }
  double discount() const { return 1.0; }
  double target_threshold() const { return 0.0; }

  static double obs_prob(int o, int s) {
    const double p1 = s == 1 ? 0.9 : 0.2;
    return o == 1 ? p1 : 1.0 - p1;
  }
  int sample_transition(int s, Action, Rng&) const { return s; }
  double observation_log_likelihood(int o, Action, int s) const { return std::log(obs_prob(o, s)); }
  Transition<int, int> step(int s, Action, Rng& rng) const {
    std::bernoulli_distribution d(obs_prob(1, s));
    return {s, s == 1 ? 1.0 : 0.0, d(rng) ? 1 : 0};
  }
  bool is_failure(int s, Action) const { return s == 0; }
  bool is_terminal(int) const { return false; }
  int sample_initial_state(Rng& rng) const {
    std::bernoulli_distribution d(0.5);
    return d(rng) ? 1 : 0;
  }
  std::array<double, 1> features(int s) const { return {static_cast<double>(s)}; }
};

/// Total-variation distance between the particle histogram and `exact`.
template <class Belief>
double tv_distance(const Belief& b, const std::vector<double>& exact) {
  std::vector<double> hist(exact.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) hist[static_cast<std::size_t>(b.particles()[i])] += b.weights()[i];
  double tv = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) tv += std::abs(hist[i] - exact[i]);
  return 0.5 * tv;
}

inline std::vector<EpisodeSample> random_batch(const NetShape& shape, std::size_t n, Rng& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.05, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<EpisodeSample> batch;
  for (std::size_t i = 0; i < n; ++i) {
    EpisodeSample s;
    for (std::size_t j = 0; j < shape.input_size; ++j) s.summary.push_back(nd(rng));
    double total = 0.0;
    for (std::size_t a = 0; a < shape.num_actions; ++a) total += s.tree_policy.emplace_back(ud(rng));
    for (double& p : s.tree_policy) p /= total;
    s.ret = 0.4 * nd(rng);
    s.failure = coin(rng) ? 1 : 0;
    batch.push_back(std::move(s));
  }
  return batch;
}

inline void randomize(TripleHeadNet& net, Rng& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  for (double& p : net.parameters()) p = nd(rng);
}

}  // namespace czero::testing
