#include <doctest.h>

#include <cmath>
#include <sstream>

#include <czero/envs/toy.hpp>
#include <czero/estimator.hpp>
#include <czero/planner.hpp>

using namespace czero;

namespace {

/// Deterministic chain: every action pays 1 and fails with probability 0.1.
struct Chain {
  using Belief = int;
  std::size_t horizon = 3;
  std::size_t actions = 2;
  std::size_t num_actions() const { return actions; }
  double discount() const { return 0.9; }
  double target_threshold() const { return 0.05; }
  BeliefTransition<int> step(const int& b, Action, Rng&) const { return {b + 1, 1.0, 0.1}; }
  bool is_terminal(const int& b) const { return static_cast<std::size_t>(b) >= horizon; }
  std::vector<double> summarize(const int& b) const { return {static_cast<double>(b)}; }
};

/// Random walk belief so every generative draw is distinct.
struct Noisy {
  using Belief = double;
  std::size_t num_actions() const { return 2; }
  double discount() const { return 1.0; }
  double target_threshold() const { return 0.0; }
  BeliefTransition<double> step(const double& b, Action, Rng& rng) const {
    std::normal_distribution<double> nd;
    return {b + nd(rng), 0.0, 0.0};
  }
  bool is_terminal(const double&) const { return false; }
  std::vector<double> summarize(const double& b) const { return {b}; }
};

class ConstantEstimator final : public Estimator {
 public:
  ConstantEstimator(std::vector<double> policy, double value, double failure)
      : est_{std::move(policy), value, failure} {}
  Estimate evaluate(std::span<const double>) const override { return est_; }

 private:
  Estimate est_;
};

}  // namespace

TEST_SUITE("planner") {

TEST_CASE("compose_failure_prob examples") {
  for (double x : {0.0, 0.3, 1.0}) CHECK(compose_failure_prob(0.0, x, 1.0) == x);
  CHECK(compose_failure_prob(1.0, 0.4, 0.3) == 1.0);
  CHECK(compose_failure_prob(0.2, 0.5, 1.0) == doctest::Approx(0.6));
  CHECK(compose_failure_prob(0.2, 0.5, 0.0) == doctest::Approx(0.2));
}

TEST_CASE("running-mean backups") {
  EdgeStats e;
  e.f = 0.9;  // prior, replaced by the first real backup
  e.visits = 1;
  update_f_value(e, 0.3);
  CHECK(e.f == doctest::Approx(0.3));
  e.f = 0.4;
  e.visits = 2;
  update_f_value(e, 0.0);
  CHECK(e.f == doctest::Approx(0.2));
  EdgeStats s;
  for (double p : {0.1, 0.5, 0.9}) {
    s.visits += 1;
    update_f_value(s, p);
    update_q_value(s, 10 * p);
  }
  CHECK(s.f == doctest::Approx(0.5));
  CHECK(s.q == doctest::Approx(5.0));
  CHECK_THROWS_AS(running_mean(0.0, 1.0, 0), ContractViolation);
}

TEST_CASE("Q normalization over the tree") {
  QNormalizer q;
  CHECK(q.normalize(3.0) == 0.5);
  for (double v : {-10.0, 0.0, 10.0}) q.insert(v);
  CHECK(q.normalize(-10.0) == 0.0);
  CHECK(q.normalize(0.0) == 0.5);
  CHECK(q.normalize(10.0) == 1.0);
  QNormalizer r;
  for (double v : {1.0, 2.0, 4.0}) r.insert(v);
  CHECK(r.normalize(2.0) == doctest::Approx(1.0 / 3.0));
  r.replace(4.0, 2.0);
  CHECK(r.normalize(2.0) == 1.0);
  QNormalizer flat;
  flat.insert(7.0);
  flat.insert(7.0);
  CHECK(flat.normalize(7.0) == 0.5);
  CHECK_THROWS(flat.replace(1.0, 2.0));
}

TEST_CASE("adapt_threshold examples") {
  CHECK(adapt_threshold(0.01, 0.5, 0.0, 0.5, 0.01, 0.1) == doctest::Approx(0.109));
  CHECK(adapt_threshold(0.5, 0.1, 0.1, 0.9, 0.01, 0.1) == doctest::Approx(0.499));
  CHECK(adapt_threshold(0.2, 0.9, 0.0, 0.25, 0.01, 1.0) == 0.25);
  CHECK(adapt_threshold(0.2, 0.0, 0.15, 0.9, 0.01, 100.0) == 0.15);
}

TEST_CASE("adapt_threshold drifts with the miscoverage rate") {
  Rng rng(1);
  std::bernoulli_distribution miss(0.3);
  double up = 0.5;
  double down = 0.5;
  for (int i = 0; i < 100000; ++i) {
    up = adapt_threshold(up, miss(rng) ? 1.0 : 0.0, 0.0, 1.0, 0.01, 1e-5);
    down = adapt_threshold(down, 0.0, 0.2, 1.0, 0.01, 1e-5);
  }
  CHECK(up > 0.5 + 0.2);
  CHECK(down < 0.5);
  CHECK(down == doctest::Approx(0.5 - 100000 * 1e-5 * 0.01));
}

TEST_CASE("cc_puct_select examples") {
  std::vector<ChildScore> two{{0, 0, 0.9, 0.5, 0.5}, {1, 0, 0.4, 0.01, 0.5}};
  CHECK(cc_puct_select(two, 10, 0.1, 0.0) == Action{1});
  CHECK(cc_puct_select(two, 10, 0.6, 0.0) == Action{0});
  CHECK_FALSE(cc_puct_select(two, 10, 0.001, 0.0).has_value());

  std::vector<ChildScore> three{{0, 10, 0.2, 0.0, 0.5}, {1, 1, 0.6, 0.0, 0.3}, {2, 0, 0.1, 0.0, 0.2}};
  const double n = 11.0;
  Action best = 0;
  double best_score = -1e300;
  for (const auto& c : three) {
    const double sc = c.q_normalized + 1.25 * c.prior * std::sqrt(n) / (1.0 + c.visits);
    if (sc > best_score) best_score = sc, best = c.action;
  }
  CHECK(cc_puct_select(three, n, 1.0, 1.25) == best);

  std::vector<ChildScore> tie{{2, 0, 0.5, 0.0, 0.5}, {1, 0, 0.5, 0.0, 0.5}};
  CHECK(cc_puct_select(tie, 1, 1.0, 1.0) == Action{1});
}

TEST_CASE("root tree policy matches the Q-weighted formula") {
  std::vector<RootChild> kids{{0, 3, 1.0, 0.0}, {1, 1, 2.0, 0.0}};
  const auto pi = tree_policy(kids, 2, 1.0);
  const double s0 = std::exp(1.0) / (std::exp(1.0) + std::exp(2.0));
  const double w0 = s0 * 0.75;
  const double w1 = (1 - s0) * 0.25;
  CHECK(w0 == doctest::Approx(0.2017).epsilon(1e-3));
  CHECK(w1 == doctest::Approx(0.1828).epsilon(1e-3));
  CHECK(pi[0] == doctest::Approx(w0 / (w0 + w1)));
  const auto greedy = tree_policy(kids, 2, 0.0);
  CHECK(greedy == std::vector<double>{1.0, 0.0});
  Rng rng(0);
  CHECK(select_root_action(kids, greedy, 1.0, 0.0, false, rng) == 0);

  const auto single = tree_policy(std::vector<RootChild>{{1, 5, 3.0, 0.0}}, 3, 1.0);
  CHECK(single == std::vector<double>{0.0, 1.0, 0.0});
  const auto same = tree_policy(std::vector<RootChild>{{0, 4, 1.0, 0.0}, {2, 4, 1.0, 0.0}}, 3, 1.0);
  CHECK(same[0] == doctest::Approx(0.5));
  CHECK(same[2] == doctest::Approx(0.5));
  CHECK(same[1] == 0.0);

  // Large returns do not overflow.
  const auto big = tree_policy(std::vector<RootChild>{{0, 2, 5000.0, 0.0}, {1, 2, 4999.0, 0.0}}, 2, 0.5);
  CHECK(std::isfinite(big[0]));
  CHECK(big[0] + big[1] == doctest::Approx(1.0));
}

TEST_CASE("root selection masks infeasible children") {
  std::vector<RootChild> kids{{0, 10, 5.0, 0.5}, {1, 2, 1.0, 0.0}};
  const auto pi = tree_policy(kids, 2, 1.0);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) CHECK(select_root_action(kids, pi, 0.1, 1.0, false, rng) == 1);
  CHECK(select_root_action(kids, pi, 0.1, 0.0, false, rng) == 1);
  CHECK_THROWS_AS(select_root_action(kids, pi, -1.0, 0.0, false, rng), std::logic_error);
  CHECK(select_root_action(kids, pi, -1.0, 0.0, true, rng) == 1);
}

TEST_CASE("simulate: terminal, leaf, and one-step Bellman") {
  Chain chain;
  const UniformEstimator uniform(2);
  PlannerConfig cfg;
  cfg.target_threshold = 0.05;
  DeltaMcts<Chain> planner(chain, uniform, cfg);
  Rng rng(1);
  DeltaMcts<Chain>::Node terminal(3, 0.05);
  CHECK(planner.simulate(terminal, 5, rng) == std::pair{0.0, 0.0});

  TripleHeadNet zero({1, 1, 4, 2});
  const NetEstimator net(zero);
  DeltaMcts<Chain> with_net(chain, net, cfg);
  DeltaMcts<Chain>::Node fresh(0, 0.05);
  CHECK(with_net.simulate(fresh, 0, rng) == std::pair{0.0, 0.5});
  CHECK(fresh.in_tree);

  const ConstantEstimator two({0.5, 0.5}, 2.0, 0.0);
  DeltaMcts<Chain> bellman(chain, two, cfg);
  DeltaMcts<Chain>::Node root(0, 0.05);
  root.in_tree = true;
  const auto [q, p] = bellman.simulate(root, 1, rng);
  CHECK(q == doctest::Approx(2.8));
  CHECK(p == doctest::Approx(0.1));
  CHECK(root.visits == 1);
}

TEST_CASE("action widening") {
  Chain chain;
  chain.actions = 6;
  chain.horizon = 100;
  const UniformEstimator uniform(6);
  PlannerConfig cfg;
  cfg.init_failure = FailureInit::Zero;
  DeltaMcts<Chain> planner(chain, uniform, cfg);
  Rng rng(2);
  DeltaMcts<Chain>::Node node(0, cfg.target_threshold);
  node.in_tree = true;
  const Action a = planner.select_action(node, rng);
  CHECK(node.children.size() == 1);
  CHECK(node.children.contains(a));

  PlannerConfig closed = cfg;
  closed.k_action = 0.5;
  DeltaMcts<Chain> gated(chain, uniform, closed);
  DeltaMcts<Chain>::Node n2(0, cfg.target_threshold);
  n2.in_tree = true;
  gated.select_action(n2, rng);
  const auto count = n2.children.size();
  n2.visits = 1;
  for (int i = 0; i < 20; ++i) gated.select_action(n2, rng);
  CHECK(n2.children.size() == count);

  DeltaMcts<Chain> wide(chain, uniform, cfg);
  DeltaMcts<Chain>::Node n3(0, cfg.target_threshold);
  n3.in_tree = true;
  n3.visits = 10000;
  for (int i = 0; i < 500 && n3.children.size() < 6; ++i) wide.select_action(n3, rng);
  CHECK(n3.children.size() == 6);
}

TEST_CASE("belief widening") {
  const UniformEstimator uniform(2);
  Noisy noisy;
  PlannerConfig cfg;
  cfg.init_failure = FailureInit::Zero;
  cfg.k_belief = 0.0;
  DeltaMcts<Noisy> replay(noisy, uniform, cfg);
  DeltaMcts<Noisy>::Node node(0.0, 0.0);
  node.in_tree = true;
  Rng rng(3);
  const Action a = replay.select_action(node, rng);
  node.children.at(a).visits = 5;
  auto* first = &replay.expand(node, a, rng);
  for (int i = 0; i < 10; ++i) CHECK(&replay.expand(node, a, rng) == first);
  CHECK(node.children.at(a).outcomes.size() == 1);

  cfg.k_belief = 1e9;
  DeltaMcts<Noisy> fresh(noisy, uniform, cfg);
  DeltaMcts<Noisy>::Node n2(0.0, 0.0);
  n2.in_tree = true;
  const Action b = fresh.select_action(n2, rng);
  n2.children.at(b).visits = 1;
  for (int i = 0; i < 10; ++i) fresh.expand(n2, b, rng);
  CHECK(n2.children.at(b).outcomes.size() == 10);
}

TEST_CASE("bootstrap F0 caches its generative draw") {
  Chain chain;
  const ConstantEstimator est({0.5, 0.5}, 0.0, 0.5);
  PlannerConfig cfg;
  cfg.init_failure = FailureInit::Bootstrap;
  DeltaMcts<Chain> planner(chain, est, cfg);
  DeltaMcts<Chain>::Node node(0, cfg.target_threshold);
  node.in_tree = true;
  Rng rng(4);
  const Action a = planner.select_action(node, rng);
  const auto& edge = node.children.at(a);
  CHECK(edge.outcomes.size() == 1);
  CHECK(edge.f == doctest::Approx(0.1 + 0.9 * 0.5));
  cfg.init_failure = FailureInit::Immediate;
  DeltaMcts<Chain> imm(chain, est, cfg);
  DeltaMcts<Chain>::Node n2(0, cfg.target_threshold);
  n2.in_tree = true;
  const Action b = imm.select_action(n2, rng);
  CHECK(n2.children.at(b).f == doctest::Approx(0.1));
}

TEST_CASE("plan is deterministic and returns a distribution") {
  const ToyCcMdp toy(0.3);
  const UniformEstimator uniform(2);
  PlannerConfig cfg;
  cfg.n_online = 500;
  cfg.depth = 2;
  cfg.target_threshold = 0.3;
  DeltaMcts<ToyCcMdp> planner(toy, uniform, cfg);
  Rng r1(7), r2(7);
  const auto a = planner.plan({}, r1);
  const auto b = planner.plan({}, r2);
  CHECK(a.action == b.action);
  CHECK(a.tree_policy == b.tree_policy);
  double total = 0.0;
  for (double p : a.tree_policy) total += p;
  CHECK(total == doctest::Approx(1.0));
  std::ostringstream dump;
  planner.dump_tree(dump);
  CHECK(dump.str().find("\"kind\":\"edge\"") != std::string::npos);
  CHECK_THROWS_AS(planner.plan({0, 2}, r1), ContractViolation);
}

TEST_CASE("toy constrained optimum is found") {
  for (double delta0 : {0.3, 1.0}) {
    const ToyCcMdp toy(delta0);
    const auto oracle = toy_constrained_optimum(toy);
    const UniformEstimator uniform(2);
    PlannerConfig cfg;
    cfg.n_online = 2000;
    cfg.depth = 2;
    cfg.temperature = 0.0;
    cfg.target_threshold = delta0;
    DeltaMcts<ToyCcMdp> planner(toy, uniform, cfg);
    int hits = 0;
    for (int seed = 0; seed < 10; ++seed) {
      Rng rng(static_cast<std::uint64_t>(seed));
      hits += planner.plan({}, rng).action == oracle.first ? 1 : 0;
    }
    CHECK_MESSAGE(hits >= 9, "delta0 = " << delta0);
  }
}

TEST_CASE("no-adaptation planning keeps the threshold pinned") {
  Chain chain;
  chain.horizon = 4;
  const UniformEstimator uniform(2);
  PlannerConfig cfg;
  cfg.adaptation = false;
  cfg.aci_step = 0.0;
  cfg.target_threshold = 0.05;  // every edge has F >= 0.1, so the min-F fallback is exercised
  cfg.n_online = 200;
  DeltaMcts<Chain> planner(chain, uniform, cfg);
  Rng rng(5);
  const auto res = planner.plan(0, rng);
  CHECK(res.root.threshold == 0.05);
  CHECK(res.action < 2);
}

}
