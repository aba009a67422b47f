#include "czero/envs/cas.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace czero {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

void CasParams::validate() const {
  validate_model_parameters(3, discount, target_threshold);
  if (!(dt > 0.0)) throw ContractViolation("Cas: dt must be positive");
  if (!(sigma_intruder >= 0.0)) throw ContractViolation("Cas: sigma_intruder must be nonnegative");
  if (!(sigma_h > 0.0 && sigma_hdot > 0.0)) throw ContractViolation("Cas: sensor noise must be positive");
  if (!(h0_std > 0.0 && hdot0_std > 0.0)) throw ContractViolation("Cas: initial spreads must be positive");
  if (tau0 < 1) throw ContractViolation("Cas: tau0 must be at least 1");
  if (!(nmac_altitude >= 0.0)) throw ContractViolation("Cas: nmac_altitude must be nonnegative");
  variant.validate();
}

Cas::Cas(CasParams params) : params_(params) { params_.validate(); }

bool cas_failure(const CasState& s, Action, double nmac_altitude) noexcept {
  return s.tau == 0 && std::abs(s.h) <= nmac_altitude;
}

double Cas::action_rate(Action a) const {
  switch (a) {
    case kDescend:
      return -params_.rate;
    case kLevel:
      return 0.0;
    case kClimb:
      return params_.rate;
    default:
      throw ContractViolation("Cas: action out of range");
  }
}

bool Cas::is_failure(const State& s, Action a) const {
  if (s.tau != 1) return false;
  const double h_next = s.h + (s.hdot - action_rate(a)) * params_.dt;
  return std::abs(h_next) <= params_.nmac_altitude;
}

double Cas::alert_reward(const std::optional<Action>& a_prev, Action a) const {
  const double rate = action_rate(a);
  if (rate == 0.0) return 0.0;
  if (!a_prev) return -params_.alert_cost;
  const double prev = action_rate(*a_prev);
  return prev != 0.0 && std::signbit(prev) != std::signbit(rate) ? -params_.alert_cost : 0.0;
}

std::optional<Action> Cas::next_a_prev(const std::optional<Action>& a_prev, Action a) const {
  if (!a_prev && action_rate(a) == 0.0) return std::nullopt;
  return a;
}

Transition<Cas::State, Cas::Observation> Cas::step(const State& s, Action a, Rng& rng) const {
  if (s.tau <= 0) throw ContractViolation("Cas: step at tau = 0");
  const double rate = action_rate(a);
  std::normal_distribution<double> std_normal(0.0, 1.0);
  State next;
  next.h = s.h + (s.hdot - rate) * params_.dt;
  next.hdot = s.hdot + params_.sigma_intruder * std_normal(rng);
  next.a_prev = next_a_prev(s.a_prev, a);
  next.tau = s.tau - 1;
  const double r = alert_reward(s.a_prev, a) - params_.variant.failure_cost(is_failure(s, a));
  Observation o{next.h + params_.sigma_h * std_normal(rng), next.hdot + params_.sigma_hdot * std_normal(rng)};
  return {next, r, o};
}

Cas::State Cas::sample_initial_state(Rng& rng) const {
  std::normal_distribution<double> std_normal(0.0, 1.0);
  State s;
  s.h = params_.h0_std * std_normal(rng);
  s.hdot = params_.hdot0_std * std_normal(rng);
  s.tau = params_.tau0;
  return s;
}

LinearGaussianModel Cas::linear_model(const std::optional<Action>& a_prev, Action a) const {
  const double dt = params_.dt;
  const auto prev = next_a_prev(a_prev, a);
  LinearGaussianModel m;
  m.transition = Eigen::MatrixXd::Zero(4, 4);
  m.transition(0, 0) = 1.0;
  m.transition(0, 1) = dt;
  m.transition(1, 1) = 1.0;
  m.transition(3, 3) = 1.0;
  m.offset = Eigen::Vector4d(-action_rate(a) * dt, 0.0, prev ? action_rate(*prev) : 0.0, -1.0);
  m.process_noise = Eigen::MatrixXd::Zero(4, 4);
  m.process_noise(1, 1) = params_.sigma_intruder * params_.sigma_intruder;
  m.observation = Eigen::MatrixXd::Zero(2, 4);
  m.observation(0, 0) = 1.0;
  m.observation(1, 1) = 1.0;
  m.observation_noise = Eigen::Vector2d(params_.sigma_h * params_.sigma_h, params_.sigma_hdot * params_.sigma_hdot)
                            .asDiagonal();
  return m;
}

CasBelief CasKalmanUpdater::initial_belief(Rng&) const {
  const auto& p = model_.params();
  Eigen::Vector4d mean(0.0, 0.0, 0.0, static_cast<double>(p.tau0));
  Eigen::Vector4d var(p.h0_std * p.h0_std, p.hdot0_std * p.hdot0_std, 0.0, 0.0);
  return {GaussianBelief(mean, var.asDiagonal().toDenseMatrix()), std::nullopt, p.tau0};
}

UpdateResult<CasBelief> CasKalmanUpdater::update(const Belief& b, Action a, const Cas::Observation& o, Rng&) const {
  if (b.tau <= 0) throw ContractViolation("CasKalmanUpdater: update at tau = 0");
  const Eigen::Vector2d z(o[0], o[1]);
  auto g = kf_update(b.gaussian, model_.linear_model(b.a_prev, a), z);
  return {CasBelief{std::move(g), model_.next_a_prev(b.a_prev, a), b.tau - 1}, false};
}

CasState CasKalmanUpdater::sample_state(const Belief& b, Rng& rng) const {
  const auto x = czero::sample_state(b.gaussian, rng);
  return {x(0), x(1), b.a_prev, b.tau};
}

double CasKalmanUpdater::failure_probability(const Belief& b, Action a) const {
  const double rate = model_.action_rate(a);
  if (b.tau != 1) return 0.0;
  const auto& p = model_.params();
  const auto& mu = b.gaussian.mean();
  const auto& P = b.gaussian.covariance();
  const double m = mu(0) + (mu(1) - rate) * p.dt;
  const double var = P(0, 0) + 2.0 * p.dt * P(0, 1) + p.dt * p.dt * P(1, 1);
  if (!(var > 1e-300)) return std::abs(m) <= p.nmac_altitude ? 1.0 : 0.0;
  const double sd = std::sqrt(var);
  return std::clamp(normal_cdf((p.nmac_altitude - m) / sd) - normal_cdf((-p.nmac_altitude - m) / sd), 0.0, 1.0);
}

std::vector<double> CasKalmanUpdater::summarize(const Belief& b) const { return czero::summarize(b.gaussian); }

CasMdp make_cas_mdp(const CasParams& params, std::size_t horizon) {
  Cas pomdp(params);
  return to_belief_mdp(pomdp, CasKalmanUpdater(pomdp), horizon);
}

}  // namespace czero
