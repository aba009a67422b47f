#include <doctest.h>

#include <czero/envs/lightdark.hpp>
#include <czero/model.hpp>
#include <czero/updaters.hpp>

#include "support.hpp"

using namespace czero;

TEST_SUITE("core") {

TEST_CASE("belief_reward examples") {
  auto r = [](double s, Action) { return s; };
  CHECK(belief_reward(ParticleBelief<double>({100.0, 0.0}), 0, r) == doctest::Approx(50.0));
  CHECK(belief_reward(ParticleBelief<double>({-1.0, -1.0, -1.0}), 0, r) == doctest::Approx(-1.0));
  CHECK(belief_reward(ParticleBelief<double>({10.0, -10.0}, {0.3, 0.7}), 0, r) == doctest::Approx(-4.0));
}

TEST_CASE("belief_reward is linear in the weights") {
  auto r = [](double s, Action) { return s * s; };
  const std::vector<double> ps{1.0, 2.0, 3.0};
  const std::vector<double> w1{0.2, 0.3, 0.5};
  const std::vector<double> w2{0.6, 0.4, 0.0};
  const double alpha = 0.35;
  std::vector<double> mix(3);
  for (std::size_t i = 0; i < 3; ++i) mix[i] = alpha * w1[i] + (1 - alpha) * w2[i];
  const double lhs = belief_reward(ParticleBelief<double>(ps, mix), 0, r);
  const double rhs = alpha * belief_reward(ParticleBelief<double>(ps, w1), 0, r) +
                     (1 - alpha) * belief_reward(ParticleBelief<double>(ps, w2), 0, r);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("immediate_failure_probability examples and monotonicity") {
  auto failing = [](double s, Action) { return s < 0.0; };
  CHECK(immediate_failure_probability(ParticleBelief<double>({-1.0, 1.0}), 0, failing) == doctest::Approx(0.5));
  CHECK(immediate_failure_probability(ParticleBelief<double>({1.0, 2.0}), 0, failing) == 0.0);
  CHECK(immediate_failure_probability(ParticleBelief<double>({-1.0, 1.0}, {0.3, 0.7}), 0, failing) ==
        doctest::Approx(0.3));
  double prev = -1.0;
  for (double w = 0.0; w <= 1.0; w += 0.1) {
    const double p = immediate_failure_probability(ParticleBelief<double>({-1.0, 1.0}, {w, 1.0 - w}), 0, failing);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("non-normalized weights are rejected") {
  CHECK_THROWS_AS(ParticleBelief<double>({1.0, 2.0}, {0.5, 0.6}), ContractViolation);
  CHECK_THROWS_AS(ParticleBelief<double>({1.0}, {-1.0}), ContractViolation);
  CHECK_THROWS_AS(ParticleBelief<double>(std::vector<double>{}), ContractViolation);
}

TEST_CASE("model parameters are validated") {
  CHECK_THROWS_AS(validate_model_parameters(0, 0.9, 0.1), ContractViolation);
  CHECK_THROWS_AS(validate_model_parameters(2, 1.5, 0.1), ContractViolation);
  CHECK_THROWS_AS(validate_model_parameters(2, 0.9, -0.1), ContractViolation);
  CHECK_NOTHROW(validate_model_parameters(2, 1.0, 1.0));
}

TEST_CASE("to_belief_mdp: single deterministic particle") {
  LightDark ld;
  const auto mdp = to_belief_mdp(ld, ParticleFilterUpdater<LightDark>(ld, 1), 60);
  Rng rng(3);
  using B = decltype(mdp)::Belief;
  const B b{ParticleBelief<LightDarkState>({LightDarkState{4.0, false}}), 0, false};
  const auto tr = mdp.step(b, LightDark::kUp, rng);
  REQUIRE(tr.next.belief.size() == 1);
  CHECK(tr.next.belief.particles()[0].y == 5.0);
  CHECK(tr.failure_probability == 0.0);
  const auto stop = mdp.step(b, LightDark::kStop, rng);
  CHECK(stop.failure_probability == 1.0);
  CHECK(mdp.is_terminal(stop.next));
}

TEST_CASE("to_belief_mdp: stop with all particles at the origin has p = 0") {
  const auto mdp = make_lightdark_mdp({}, 3, 60);
  using B = std::remove_cvref_t<decltype(mdp)>::Belief;
  const B b{ParticleBelief<LightDarkState>({{-0.5, false}, {0.0, false}, {0.9, false}}), 0, false};
  Rng rng(1);
  const auto tr = mdp.step(b, LightDark::kStop, rng);
  CHECK(tr.failure_probability == 0.0);
  CHECK(tr.reward == 100.0);
  CHECK(mdp.is_terminal(tr.next));
}

TEST_CASE("to_belief_mdp: two-state posterior matches Bayes rule") {
  testing::TwoState m;
  const std::size_t n = 200000;
  const auto mdp = to_belief_mdp(m, ParticleFilterUpdater<testing::TwoState>(m, n), 10);
  Rng rng(11);
  const auto b0 = mdp.initial_belief(rng);
  // Repeat until the sampled observation is 1, then compare with P(s=1 | o=1).
  for (int attempt = 0; attempt < 20; ++attempt) {
    Rng step_rng(100 + attempt);
    const auto s = mdp.updater().sample_state(b0.belief, step_rng);
    auto tr = m.step(s, 0, step_rng);
    const auto post = mdp.updater().update(b0.belief, 0, tr.observation, step_rng).belief;
    double p1 = 0.0;
    double prior1 = 0.0;
    for (std::size_t i = 0; i < b0.belief.size(); ++i) prior1 += b0.belief.weights()[i] * b0.belief.particles()[i];
    for (std::size_t i = 0; i < post.size(); ++i) p1 += post.weights()[i] * post.particles()[i];
    const double l1 = testing::TwoState::obs_prob(tr.observation, 1);
    const double l0 = testing::TwoState::obs_prob(tr.observation, 0);
    const double exact = l1 * prior1 / (l1 * prior1 + l0 * (1.0 - prior1));
    CHECK(p1 == doctest::Approx(exact).epsilon(0.01));
  }
}

TEST_CASE("to_belief_mdp is reproducible for a fixed seed") {
  const auto mdp = make_lightdark_mdp({}, 100, 60);
  Rng init(5);
  const auto b = mdp.initial_belief(init);
  Rng r1(42);
  Rng r2(42);
  const auto t1 = mdp.step(b, LightDark::kDown, r1);
  const auto t2 = mdp.step(b, LightDark::kDown, r2);
  CHECK(t1.reward == t2.reward);
  CHECK(t1.failure_probability == t2.failure_probability);
  REQUIRE(t1.next.belief.size() == t2.next.belief.size());
  for (std::size_t i = 0; i < t1.next.belief.size(); ++i)
    CHECK(t1.next.belief.particles()[i].y == t2.next.belief.particles()[i].y);
}

TEST_CASE("belief terminates at the horizon") {
  const auto mdp = make_lightdark_mdp({}, 10, 2);
  Rng rng(0);
  auto b = mdp.initial_belief(rng);
  CHECK_FALSE(mdp.is_terminal(b));
  b = mdp.step(b, LightDark::kUp, rng).next;
  CHECK_FALSE(mdp.is_terminal(b));
  b = mdp.step(b, LightDark::kUp, rng).next;
  CHECK(mdp.is_terminal(b));
}

TEST_CASE("mix_seed separates nearby seeds") {
  CHECK(mix_seed(0) != mix_seed(1));
  CHECK(mix_seed(1) != 1);
  static_assert(mix_seed(7) == mix_seed(7));
}

}
