#pragma once

#include <cstddef>
#include <vector>

#include "czero/belief.hpp"
#include "czero/model.hpp"
#include "czero/particle_filter.hpp"

namespace czero {

/// Bootstrap particle filter bound to a POMDP that also exposes
/// `features(state)` for the network summary.
template <class P>
  requires CcPomdp<P> && FilterModel<P>
class ParticleFilterUpdater {
 public:
  using Belief = ParticleBelief<typename P::State>;

  ParticleFilterUpdater(P model, std::size_t n_particles) : model_(std::move(model)), n_particles_(n_particles) {
    if (n_particles_ == 0) throw ContractViolation("ParticleFilterUpdater: n_particles must be positive");
  }

  std::size_t n_particles() const noexcept { return n_particles_; }

  Belief initial_belief(Rng& rng) const {
    std::vector<typename P::State> ps;
    ps.reserve(n_particles_);
    for (std::size_t i = 0; i < n_particles_; ++i) ps.push_back(model_.sample_initial_state(rng));
    return Belief(std::move(ps));
  }

  UpdateResult<Belief> update(const Belief& b, Action a, const typename P::Observation& o, Rng& rng) const {
    auto r = pf_update_or_reset(b, a, o, model_, rng);
    return {std::move(r.belief), r.degenerate};
  }

  typename P::State sample_state(const Belief& b, Rng& rng) const { return czero::sample_state(b, rng); }

  double failure_probability(const Belief& b, Action a) const {
    return immediate_failure_probability(b, a, [this](const auto& s, Action act) { return model_.is_failure(s, act); });
  }

  std::vector<double> summarize(const Belief& b) const {
    return czero::summarize(b, [this](const auto& s) { return model_.features(s); });
  }

 private:
  P model_;
  std::size_t n_particles_;
};

}  // namespace czero
