#include "czero/envs/toy.hpp"

#include <array>

namespace czero {

namespace {

constexpr std::array<std::array<ToyCcMdp::Cell, 2>, 3> kTable{{
    {{{1, 0.0, 0.0}, {2, 0.0, 0.0}}},
    {{{1, 1.0, 0.0}, {1, 5.0, 0.2}}},
    {{{2, 0.0, 0.0}, {2, 10.0, 0.5}}},
}};

}  // namespace

ToyCcMdp::ToyCcMdp(double target_threshold, EnvVariant variant)
    : target_threshold_(target_threshold), variant_(variant) {
  validate_model_parameters(2, 1.0, target_threshold_);
  variant_.validate();
}

const ToyCcMdp::Cell& ToyCcMdp::cell(int state, Action a) {
  if (state < 0 || state > 2 || a > 1) throw ContractViolation("ToyCcMdp: state or action out of range");
  return kTable[static_cast<std::size_t>(state)][a];
}

BeliefTransition<ToyBelief> ToyCcMdp::step(const Belief& b, Action a, Rng&) const {
  if (is_terminal(b)) throw ContractViolation("ToyCcMdp: step at a terminal belief");
  const auto& c = cell(b.state, a);
  const double penalty = variant_.mode == RewardMode::Penalty ? variant_.penalty * c.failure : 0.0;
  return {{c.next, b.time + 1}, c.reward - penalty, c.failure};
}

std::vector<double> ToyCcMdp::summarize(const Belief& b) const {
  std::vector<double> out(4, 0.0);
  out[static_cast<std::size_t>(b.state)] = 1.0;
  out[3] = static_cast<double>(b.time);
  return out;
}

std::array<ToyPolicyValue, 4> toy_enumerate(const ToyCcMdp& mdp) {
  std::array<ToyPolicyValue, 4> out{};
  Rng rng(0);
  std::size_t i = 0;
  for (Action a1 = 0; a1 < 2; ++a1) {
    for (Action a2 = 0; a2 < 2; ++a2) {
      const auto t1 = mdp.step(mdp.initial_belief(rng), a1, rng);
      const auto t2 = mdp.step(t1.next, a2, rng);
      out[i++] = {a1, a2, t1.reward + mdp.discount() * t2.reward,
                  t1.failure_probability + (1.0 - t1.failure_probability) * t2.failure_probability};
    }
  }
  return out;
}

ToyPolicyValue toy_constrained_optimum(const ToyCcMdp& mdp) {
  const auto all = toy_enumerate(mdp);
  const ToyPolicyValue* best = nullptr;
  for (const auto& p : all)
    if (p.failure <= mdp.target_threshold() && (best == nullptr || p.value > best->value)) best = &p;
  if (best == nullptr) throw ContractViolation("toy_constrained_optimum: no feasible policy");
  return *best;
}

}  // namespace czero
