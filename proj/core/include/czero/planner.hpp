#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "czero/estimator.hpp"
#include "czero/model.hpp"
#include "czero/planner_math.hpp"
#include "czero/types.hpp"

namespace czero {

struct RootStats {
  std::vector<RootChild> children;
  double threshold = 0.0;
  long visits = 0;
};

struct PlanResult {
  Action action = 0;
  std::vector<double> tree_policy;
  RootStats root;
};

/// Delta-MCTS: PUCT search over a chance-constrained belief MDP with
/// progressive widening on actions and beliefs, network bootstrapping at the
/// leaves, running-mean Q/F backups, and per-node ACI threshold adaptation.
///
/// A planner instance owns the tree of its most recent plan() call and is
/// confined to one thread; the model and estimator are only read.
template <CcBeliefMdp M>
class DeltaMcts {
 public:
  using Belief = typename M::Belief;

  struct Node;

  struct Outcome {
    std::unique_ptr<Node> node;
    double reward = 0.0;
    double failure_probability = 0.0;
  };

  struct Edge : EdgeStats {
    std::vector<Outcome> outcomes;
  };

  struct Node {
    explicit Node(Belief b, double threshold0) : belief(std::move(b)), threshold(threshold0) {}
    Belief belief;
    std::optional<Estimate> estimate;
    long visits = 0;
    double threshold = 0.0;
    bool in_tree = false;
    std::map<Action, Edge> children;
  };

  DeltaMcts(const M& model, const Estimator& estimator, PlannerConfig config)
      : model_(&model), estimator_(&estimator), config_(std::move(config)) {
    config_.validate();
  }

  const PlannerConfig& config() const noexcept { return config_; }
  const Node* root() const noexcept { return root_.get(); }

  /// Runs n_online simulations from `root_belief` and picks the root action
  /// under F(b,a) <= max(Delta_0, Delta(b)).
  PlanResult plan(const Belief& root_belief, Rng& rng) {
    if (model_->is_terminal(root_belief)) throw ContractViolation("plan: root belief is terminal");
    q_norm_.clear();
    root_ = std::make_unique<Node>(root_belief, config_.target_threshold);
    root_->in_tree = true;
    root_->visits = config_.init_node_visits;
    for (std::size_t i = 0; i < config_.n_online; ++i) simulate(*root_, config_.depth, rng);

    PlanResult result;
    result.root = root_stats(*root_);
    result.tree_policy = tree_policy(result.root.children, model_->num_actions(), config_.temperature);
    result.action = select_root_action(result.root.children, result.tree_policy, selection_threshold(*root_),
                                       config_.temperature, !config_.adaptation, rng);
    return result;
  }

  /// One simulation; returns (q, p). Inserts unseen nodes and answers with the
  /// network estimate at unexpanded nodes or depth 0.
  std::pair<double, double> simulate(Node& node, std::size_t depth, Rng& rng) {
    if (model_->is_terminal(node.belief)) return {0.0, 0.0};
    if (!node.in_tree || depth == 0) {
      if (!node.in_tree) {
        node.in_tree = true;
        node.visits = config_.init_node_visits;
      }
      const auto& est = estimate_of(node);
      return {est.value, est.failure};
    }
    node.visits += 1;
    const Action a = select_action(node, rng);
    Edge& edge = node.children.at(a);
    Outcome& outcome = expand(node, a, rng);
    const double r = outcome.reward;
    const double p_now = outcome.failure_probability;
    const auto [v_next, p_next] = simulate(*outcome.node, depth - 1, rng);

    const double q = r + model_->discount() * v_next;
    const double p = compose_failure_prob(p_now, p_next, config_.failure_discount);
    edge.visits += 1;
    const double old_q = edge.q;
    update_q_value(edge, q);
    q_norm_.replace(old_q, edge.q);
    update_f_value(edge, p);
    adapt(node, edge.f);
    return {q, p};
  }

  /// Action progressive widening followed by CC-PUCT selection.
  Action select_action(Node& node, Rng& rng) {
    const double k = config_.action_widening(model_->num_actions());
    if (widening_open(node.children.size(), k, static_cast<double>(node.visits), config_.alpha_action)) {
      const auto& prior = estimate_of(node).policy;
      std::discrete_distribution<std::size_t> dist(prior.begin(), prior.end());
      const Action a = dist(rng);
      if (!node.children.contains(a)) {
        Edge edge;
        edge.visits = config_.init_edge_visits;
        edge.q = config_.init_q;
        edge.f = initial_failure(node, a, edge, rng);
        node.children.emplace(a, std::move(edge));
        q_norm_.insert(config_.init_q);
        node.threshold = config_.target_threshold;
        adapt(node, node.children.at(a).f);
      }
    }
    return cc_puct(node);
  }

  /// Belief progressive widening: draw a fresh (b', r, p) while the gate is
  /// open, otherwise replay a cached outcome uniformly.
  Outcome& expand(Node& node, Action a, Rng& rng) {
    Edge& edge = node.children.at(a);
    if (edge.outcomes.empty() ||
        widening_open(edge.outcomes.size(), config_.k_belief, static_cast<double>(edge.visits), config_.alpha_belief)) {
      return draw_outcome(edge, node, a, rng);
    }
    std::uniform_int_distribution<std::size_t> pick(0, edge.outcomes.size() - 1);
    return edge.outcomes[pick(rng)];
  }

  /// Q normalized over every edge currently in the tree.
  double normalized_q(double q) const { return q_norm_.normalize(q); }

  /// Delta'(b): the threshold CC-PUCT and root selection enforce.
  double selection_threshold(const Node& node) const {
    return config_.adaptation ? std::max(config_.target_threshold, node.threshold) : config_.target_threshold;
  }

  /// Line-delimited records, one per node and per edge, for debugging.
  void dump_tree(std::ostream& os) const {
    if (!root_) return;
    std::size_t next_id = 0;
    dump_node(os, *root_, next_id, -1, 0);
  }

 private:
  const Estimate& estimate_of(Node& node) {
    if (!node.estimate) {
      if (estimator_->uses_summary()) {
        const auto summary = model_->summarize(node.belief);
        node.estimate = estimator_->evaluate(summary);
      } else {
        node.estimate = estimator_->evaluate({});
      }
    }
    return *node.estimate;
  }

  Outcome& draw_outcome(Edge& edge, const Node& node, Action a, Rng& rng) {
    auto tr = model_->step(node.belief, a, rng);
    Outcome out;
    out.node = std::make_unique<Node>(std::move(tr.next), config_.target_threshold);
    out.reward = tr.reward;
    out.failure_probability = tr.failure_probability;
    edge.outcomes.push_back(std::move(out));
    return edge.outcomes.back();
  }

  double initial_failure(Node& node, Action a, Edge& edge, Rng& rng) {
    switch (config_.init_failure) {
      case FailureInit::Zero:
        return 0.0;
      case FailureInit::Immediate:
        return draw_outcome(edge, node, a, rng).failure_probability;
      case FailureInit::Bootstrap: {
        Outcome& out = draw_outcome(edge, node, a, rng);
        const double future = model_->is_terminal(out.node->belief) ? 0.0 : estimate_of(*out.node).failure;
        return compose_failure_prob(out.failure_probability, future, config_.failure_discount);
      }
    }
    return 0.0;
  }

  void adapt(Node& node, double edge_f) {
    if (!config_.adaptation || node.children.empty()) return;
    double lo = 1.0;
    double hi = 0.0;
    for (const auto& [a, e] : node.children) {
      lo = std::min(lo, e.f);
      hi = std::max(hi, e.f);
    }
    node.threshold = adapt_threshold(node.threshold, edge_f, lo, hi, config_.target_threshold, config_.aci_step);
  }

  Action cc_puct(Node& node) {
    const auto& prior = estimate_of(node).policy;
    std::vector<ChildScore> scores;
    scores.reserve(node.children.size());
    for (const auto& [a, e] : node.children)
      scores.push_back({a, e.visits, q_norm_.normalize(e.q), e.f, prior[a]});
    const double threshold = selection_threshold(node);
    if (auto a = cc_puct_select(scores, static_cast<double>(node.visits), threshold, config_.exploration)) return *a;
    if (!config_.adaptation) return min_failure_child(scores);
    throw std::logic_error("cc_puct: no child satisfies F(b,a) <= Delta'(b); clip guarantee violated");
  }

  RootStats root_stats(const Node& node) const {
    RootStats s;
    s.threshold = node.threshold;
    s.visits = node.visits;
    for (const auto& [a, e] : node.children) s.children.push_back({a, e.visits, e.q, e.f});
    return s;
  }

  void dump_node(std::ostream& os, const Node& node, std::size_t& next_id, long parent, Action via) const {
    const std::size_t id = next_id++;
    os << "{\"kind\":\"node\",\"id\":" << id << ",\"parent\":" << parent << ",\"action\":";
    if (parent < 0)
      os << "null";
    else
      os << via;
    os << ",\"N\":" << node.visits << ",\"delta\":" << node.threshold << ",\"in_tree\":" << (node.in_tree ? "true" : "false")
       << "}\n";
    for (const auto& [a, e] : node.children) {
      os << "{\"kind\":\"edge\",\"node\":" << id << ",\"action\":" << a << ",\"N\":" << e.visits << ",\"Q\":" << e.q
         << ",\"F\":" << e.f << ",\"outcomes\":" << e.outcomes.size() << "}\n";
      for (const auto& o : e.outcomes) dump_node(os, *o.node, next_id, static_cast<long>(id), a);
    }
  }

  const M* model_;
  const Estimator* estimator_;
  PlannerConfig config_;
  std::unique_ptr<Node> root_;
  QNormalizer q_norm_;
};

}  // namespace czero
