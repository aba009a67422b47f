#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "czero/types.hpp"

namespace czero {

/// How a new edge's F-value is initialized before its first backup.
enum class FailureInit {
  Zero,       ///< F0 = 0
  Immediate,  ///< F0 = p from one generative draw
  Bootstrap,  ///< F0 = p + delta (1 - p) F_theta(b') from one generative draw
};

struct PlannerConfig {
  std::size_t n_online = 100;
  std::size_t depth = 10;
  double exploration = 1.25;
  /// Action widening coefficient; unset means |A|.
  std::optional<double> k_action;
  double alpha_action = 0.5;
  double k_belief = 2.0;
  double alpha_belief = 0.25;
  /// ACI step size eta.
  double aci_step = 1e-5;
  /// Weight on future failure probability.
  double failure_discount = 1.0;
  /// Target failure probability Delta_0.
  double target_threshold = 0.01;
  /// Root sampling temperature; 0 selects the argmax.
  double temperature = 1.0;
  /// When false, Delta(b) stays pinned at Delta_0 (hard constraint) and an
  /// empty feasible set falls back to the minimal-F child.
  bool adaptation = true;
  long init_node_visits = 0;
  long init_edge_visits = 0;
  double init_q = 0.0;
  FailureInit init_failure = FailureInit::Bootstrap;

  void validate() const;
  double action_widening(std::size_t num_actions) const {
    return k_action.value_or(static_cast<double>(num_actions));
  }
};

/// p + delta (1 - p) p_future: probability of failing now or later, assuming
/// independence, with the future term discounted by delta.
double compose_failure_prob(double p, double p_future, double delta);

/// Visit count and running means carried by every action edge.
struct EdgeStats {
  long visits = 0;
  double q = 0.0;
  double f = 0.0;
};

/// Running-mean update x += (obs - x) / n; requires n >= 1.
double running_mean(double current, double observation, long n);

/// Q <- Q + (q - Q) / N(b,a). Call after incrementing edge.visits.
void update_q_value(EdgeStats& edge, double q_observed);

/// F <- F + (p - F) / N(b,a), clamped into [0, 1]. Call after incrementing edge.visits.
void update_f_value(EdgeStats& edge, double p_observed);

/// One ACI step: err = 1{edge_f > threshold};
/// returns clip(threshold + eta (err - delta0), lower, upper).
double adapt_threshold(double threshold, double edge_f, double lower, double upper, double delta0, double eta);

/// Progressive-widening gate: count <= k * visits^alpha.
bool widening_open(std::size_t count, double k, double visits, double alpha);

/// Min-max normalization of Q over every edge currently in the tree.
class QNormalizer {
 public:
  void clear() { values_.clear(); }
  void insert(double q) { values_.insert(q); }
  void replace(double old_q, double new_q);
  std::size_t size() const noexcept { return values_.size(); }

  /// (q - min) / (max - min), or 0.5 when the tree's Q range is degenerate.
  double normalize(double q) const;

 private:
  std::multiset<double> values_;
};

/// Candidate for CC-PUCT selection.
struct ChildScore {
  Action action = 0;
  long visits = 0;
  double q_normalized = 0.0;
  double f = 0.0;
  double prior = 0.0;
};

/// argmax over children with f <= threshold of
///   q_normalized + c * prior * sqrt(node_visits) / (1 + visits).
/// Ties go to the lowest action; returns nullopt if no child is feasible.
std::optional<Action> cc_puct_select(std::span<const ChildScore> children, double node_visits, double threshold,
                                     double exploration);

/// Child with the smallest F (lowest action on ties).
Action min_failure_child(std::span<const ChildScore> children);

struct RootChild {
  Action action = 0;
  long visits = 0;
  double q = 0.0;
  double f = 0.0;
};

/// Q-weighted tree policy over the full action space:
///   pi(a) ∝ (softmax(Q)(a) * N(a) / sum N)^(1/tau),
/// evaluated in log space. Non-children get 0. tau = 0 yields the one-hot argmax.
std::vector<double> tree_policy(std::span<const RootChild> children, std::size_t num_actions, double temperature);

/// Root decision under the constraint f <= threshold: sample from the masked
/// tree policy when tau > 0, argmax when tau = 0. With `fallback_min_f`, an
/// empty feasible set picks the minimal-F child; otherwise it is a logic error.
Action select_root_action(std::span<const RootChild> children, std::span<const double> policy, double threshold,
                          double temperature, bool fallback_min_f, Rng& rng);

}  // namespace czero
