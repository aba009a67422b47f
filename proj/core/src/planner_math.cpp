#include "czero/planner_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace czero {

void PlannerConfig::validate() const {
  if (n_online == 0) throw ContractViolation("PlannerConfig: n_online must be positive");
  if (depth == 0) throw ContractViolation("PlannerConfig: depth must be at least 1");
  if (!(exploration >= 0.0)) throw ContractViolation("PlannerConfig: exploration constant must be nonnegative");
  if (k_action && !(*k_action >= 0.0)) throw ContractViolation("PlannerConfig: k_action must be nonnegative");
  if (!(k_belief >= 0.0)) throw ContractViolation("PlannerConfig: k_belief must be nonnegative");
  if (!(alpha_action > 0.0 && alpha_action < 1.0)) throw ContractViolation("PlannerConfig: alpha_action must lie in (0, 1)");
  if (!(alpha_belief > 0.0 && alpha_belief < 1.0)) throw ContractViolation("PlannerConfig: alpha_belief must lie in (0, 1)");
  if (!(aci_step >= 0.0)) throw ContractViolation("PlannerConfig: aci_step must be nonnegative");
  if (!(failure_discount >= 0.0 && failure_discount <= 1.0))
    throw ContractViolation("PlannerConfig: failure_discount must lie in [0, 1]");
  if (!(target_threshold >= 0.0 && target_threshold <= 1.0))
    throw ContractViolation("PlannerConfig: target_threshold must lie in [0, 1]");
  if (!(temperature >= 0.0)) throw ContractViolation("PlannerConfig: temperature must be nonnegative");
  if (init_node_visits < 0 || init_edge_visits < 0)
    throw ContractViolation("PlannerConfig: initial visit counts must be nonnegative");
}

double compose_failure_prob(double p, double p_future, double delta) {
  return std::clamp(p + delta * (1.0 - p) * p_future, 0.0, 1.0);
}

double running_mean(double current, double observation, long n) {
  if (n < 1) throw ContractViolation("running_mean: count must be at least 1");
  return current + (observation - current) / static_cast<double>(n);
}

void update_q_value(EdgeStats& edge, double q_observed) { edge.q = running_mean(edge.q, q_observed, edge.visits); }

void update_f_value(EdgeStats& edge, double p_observed) {
  edge.f = std::clamp(running_mean(edge.f, p_observed, edge.visits), 0.0, 1.0);
}

double adapt_threshold(double threshold, double edge_f, double lower, double upper, double delta0, double eta) {
  const double err = edge_f > threshold ? 1.0 : 0.0;
  return std::clamp(threshold + eta * (err - delta0), lower, upper);
}

bool widening_open(std::size_t count, double k, double visits, double alpha) {
  return static_cast<double>(count) <= k * std::pow(visits, alpha);
}

void QNormalizer::replace(double old_q, double new_q) {
  const auto it = values_.find(old_q);
  if (it == values_.end()) throw std::logic_error("QNormalizer: replacing a Q-value that is not tracked");
  values_.erase(it);
  values_.insert(new_q);
}

double QNormalizer::normalize(double q) const {
  if (values_.empty()) return 0.5;
  const double lo = *values_.begin();
  const double hi = *values_.rbegin();
  if (!(hi > lo)) return 0.5;
  return (q - lo) / (hi - lo);
}

std::optional<Action> cc_puct_select(std::span<const ChildScore> children, double node_visits, double threshold,
                                     double exploration) {
  std::optional<Action> best;
  double best_score = -std::numeric_limits<double>::infinity();
  const double sqrt_n = std::sqrt(std::max(node_visits, 0.0));
  for (const auto& c : children) {
    if (!(c.f <= threshold)) continue;
    const double score = c.q_normalized + exploration * c.prior * sqrt_n / (1.0 + static_cast<double>(c.visits));
    if (!best || score > best_score || (score == best_score && c.action < *best)) {
      best = c.action;
      best_score = score;
    }
  }
  return best;
}

Action min_failure_child(std::span<const ChildScore> children) {
  if (children.empty()) throw std::logic_error("min_failure_child: no children");
  const ChildScore* best = &children.front();
  for (const auto& c : children)
    if (c.f < best->f || (c.f == best->f && c.action < best->action)) best = &c;
  return best->action;
}

namespace {

// log of the unnormalized tree-policy weight; -inf for unvisited children.
double log_weight(const RootChild& c, double temperature) {
  if (c.visits <= 0) return -std::numeric_limits<double>::infinity();
  const double lw = c.q + std::log(static_cast<double>(c.visits));
  return temperature > 0.0 ? lw / temperature : lw;
}

}  // namespace

std::vector<double> tree_policy(std::span<const RootChild> children, std::size_t num_actions, double temperature) {
  std::vector<double> pi(num_actions, 0.0);
  if (children.empty()) return pi;
  for (const auto& c : children)
    if (c.action >= num_actions) throw ContractViolation("tree_policy: child action out of range");

  double best = -std::numeric_limits<double>::infinity();
  const RootChild* arg = nullptr;
  for (const auto& c : children) {
    const double lw = log_weight(c, temperature);
    if (lw > best || (lw == best && arg != nullptr && c.action < arg->action)) {
      best = lw;
      arg = &c;
    }
  }
  if (!std::isfinite(best)) {
    // No child has been visited; spread mass uniformly over the children.
    for (const auto& c : children) pi[c.action] = 1.0 / static_cast<double>(children.size());
    return pi;
  }
  if (temperature == 0.0) {
    pi[arg->action] = 1.0;
    return pi;
  }
  double total = 0.0;
  for (const auto& c : children) {
    const double w = std::exp(log_weight(c, temperature) - best);
    pi[c.action] = w;
    total += w;
  }
  for (double& p : pi) p /= total;
  return pi;
}

Action select_root_action(std::span<const RootChild> children, std::span<const double> policy, double threshold,
                          double temperature, bool fallback_min_f, Rng& rng) {
  if (children.empty()) throw std::logic_error("select_root_action: root has no children");
  std::vector<const RootChild*> feasible;
  for (const auto& c : children)
    if (c.f <= threshold) feasible.push_back(&c);

  if (feasible.empty()) {
    if (!fallback_min_f)
      throw std::logic_error("select_root_action: every root child violates the failure threshold " +
                             std::to_string(threshold));
    const RootChild* best = &children.front();
    for (const auto& c : children)
      if (c.f < best->f || (c.f == best->f && c.action < best->action)) best = &c;
    return best->action;
  }

  if (temperature > 0.0) {
    std::vector<double> w;
    w.reserve(feasible.size());
    double total = 0.0;
    for (const auto* c : feasible) {
      w.push_back(policy[c->action]);
      total += w.back();
    }
    if (total > 0.0) {
      std::discrete_distribution<std::size_t> dist(w.begin(), w.end());
      return feasible[dist(rng)]->action;
    }
  }

  // Argmax of the log weight over feasible children; lowest action on ties.
  const RootChild* best = nullptr;
  double best_lw = -std::numeric_limits<double>::infinity();
  for (const auto* c : feasible) {
    const double lw = log_weight(*c, 1.0);
    if (best == nullptr || lw > best_lw || (lw == best_lw && c->action < best->action)) {
      best = c;
      best_lw = lw;
    }
  }
  return best->action;
}

}  // namespace czero
