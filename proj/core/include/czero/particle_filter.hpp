#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "czero/belief.hpp"
#include "czero/types.hpp"

namespace czero {

/// What the bootstrap filter needs from a model: a transition sampler and
/// the observation log-likelihood log O(o | a, s').
template <class M>
concept FilterModel = requires(const M& m, const typename M::State& s, Action a,
                               const typename M::Observation& o, Rng& rng) {
  typename M::State;
  typename M::Observation;
  { m.sample_transition(s, a, rng) } -> std::same_as<typename M::State>;
  { m.observation_log_likelihood(o, a, s) } -> std::convertible_to<double>;
};

/// Systematic resampling: one uniform offset, n evenly spaced pointers.
/// Returns the selected indices.
inline std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx;
  idx.reserve(n);
  std::uniform_real_distribution<double> unif(0.0, 1.0 / static_cast<double>(n));
  const double u0 = unif(rng);
  double cumulative = weights.empty() ? 0.0 : weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = u0 + static_cast<double>(i) / static_cast<double>(n);
    while (u > cumulative && j + 1 < weights.size()) cumulative += weights[++j];
    idx.push_back(j);
  }
  return idx;
}

template <class Obs>
std::string describe_observation(const Obs& o) {
  std::ostringstream os;
  if constexpr (requires { os << o; }) {
    os << o;
  } else if constexpr (requires { o.begin(); o.end(); }) {
    os << '(';
    bool first = true;
    for (const auto& v : o) {
      if (!first) os << ", ";
      os << v;
      first = false;
    }
    os << ')';
  } else {
    os << "<observation>";
  }
  return os.str();
}

namespace detail {

/// Propagates and reweights; returns false if every likelihood is zero.
template <FilterModel M>
bool propagate_and_weight(const ParticleBelief<typename M::State>& b, Action a, const typename M::Observation& o,
                          const M& model, Rng& rng, std::vector<typename M::State>& propagated,
                          std::vector<double>& weights) {
  const std::size_t n = b.size();
  propagated.clear();
  propagated.reserve(n);
  std::vector<double> log_w(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    propagated.push_back(model.sample_transition(b.particles()[i], a, rng));
    const double prior = b.weights()[i];
    log_w[i] = prior > 0.0 ? std::log(prior) + model.observation_log_likelihood(o, a, propagated.back())
                           : -std::numeric_limits<double>::infinity();
    if (log_w[i] > max_log) max_log = log_w[i];
  }
  if (!std::isfinite(max_log)) return false;
  weights.assign(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::exp(log_w[i] - max_log);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return true;
}

template <class State>
ParticleBelief<State> resample(const std::vector<State>& propagated, const std::vector<double>& weights, Rng& rng) {
  const auto idx = systematic_resample(weights, propagated.size(), rng);
  std::vector<State> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(propagated[i]);
  return ParticleBelief<State>(std::move(out));
}

}  // namespace detail

/// Bootstrap sequential-importance-resampling update. Particle count is
/// preserved; output weights are uniform. Throws DegenerateFilterError when
/// the observation has zero likelihood under every propagated particle.
template <FilterModel M>
ParticleBelief<typename M::State> pf_update(const ParticleBelief<typename M::State>& b, Action a,
                                            const typename M::Observation& o, const M& model, Rng& rng) {
  std::vector<typename M::State> propagated;
  std::vector<double> weights;
  if (!detail::propagate_and_weight(b, a, o, model, rng, propagated, weights))
    throw DegenerateFilterError(a, describe_observation(o));
  return detail::resample(propagated, weights, rng);
}

template <class State>
struct FilterResult {
  ParticleBelief<State> belief;
  bool degenerate = false;
};

/// Like pf_update, but a degenerate update keeps the propagated particles with
/// uniform weights and reports it instead of throwing.
template <FilterModel M>
FilterResult<typename M::State> pf_update_or_reset(const ParticleBelief<typename M::State>& b, Action a,
                                                   const typename M::Observation& o, const M& model, Rng& rng) {
  std::vector<typename M::State> propagated;
  std::vector<double> weights;
  if (!detail::propagate_and_weight(b, a, o, model, rng, propagated, weights))
    return {ParticleBelief<typename M::State>(std::move(propagated)), true};
  return {detail::resample(propagated, weights, rng), false};
}

}  // namespace czero
