#include "czero_app/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace czero::app {

using nlohmann::json;

namespace {

/// Reads members of one JSON object, remembering which keys were used so
/// leftovers can be reported as typos.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return;
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned())
        throw ConfigError(path_ + "." + key + ": expected " + expected<T>() + ", got " + it->dump());
    }
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": expected " + expected<T>() + ", got " + it->type_name());
    }
  }

  std::optional<Section> sub(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    return Section(*it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) throw ConfigError(path_ + ": unknown key '" + k + "'");
  }

 private:
  template <class T>
  static std::string expected() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "a nonnegative integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "a string";
  }

  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

EnvironmentId parse_environment(const std::string& s) {
  if (s == "lightdark") return EnvironmentId::LightDark;
  if (s == "cas") return EnvironmentId::Cas;
  if (s == "toy") return EnvironmentId::Toy;
  throw ConfigError("environment: unknown id '" + s + "' (expected lightdark, cas, or toy)");
}

FailureInit parse_failure_init(const std::string& s) {
  if (s == "zero") return FailureInit::Zero;
  if (s == "immediate") return FailureInit::Immediate;
  if (s == "bootstrap") return FailureInit::Bootstrap;
  throw ConfigError("planner.init_failure: expected zero, immediate, or bootstrap");
}

std::string_view failure_init_name(FailureInit f) {
  switch (f) {
    case FailureInit::Zero:
      return "zero";
    case FailureInit::Immediate:
      return "immediate";
    case FailureInit::Bootstrap:
      return "bootstrap";
  }
  return "bootstrap";
}

void read_planner(Section s, PlannerConfig& p) {
  s.read("n_online", p.n_online);
  s.read("depth", p.depth);
  s.read("exploration", p.exploration);
  double k_action = -1.0;
  s.read("k_action", k_action);
  if (k_action >= 0.0) p.k_action = k_action;
  s.read("alpha_action", p.alpha_action);
  s.read("k_belief", p.k_belief);
  s.read("alpha_belief", p.alpha_belief);
  s.read("aci_step", p.aci_step);
  s.read("failure_discount", p.failure_discount);
  s.read("temperature", p.temperature);
  s.read("adaptation", p.adaptation);
  s.read("init_node_visits", p.init_node_visits);
  s.read("init_edge_visits", p.init_edge_visits);
  s.read("init_q", p.init_q);
  std::string init_failure;
  s.read("init_failure", init_failure);
  if (!init_failure.empty()) p.init_failure = parse_failure_init(init_failure);
  s.finish();
}

void read_train(Section s, TrainSpec& t) {
  s.read("learning_rate", t.learning_rate);
  s.read("beta1", t.beta1);
  s.read("beta2", t.beta2);
  s.read("epsilon", t.epsilon);
  s.read("weight_decay", t.weight_decay);
  s.read("batch_size", t.batch_size);
  s.read("epochs", t.epochs);
  std::string loss;
  s.read("value_loss", loss);
  if (loss == "squared") t.value_loss = ValueLoss::Squared;
  else if (loss == "absolute") t.value_loss = ValueLoss::Absolute;
  else if (!loss.empty()) throw ConfigError("train.value_loss: expected squared or absolute");
  s.finish();
}

void read_lightdark(Section s, RunConfig& c) {
  s.read("n_particles", c.lightdark_particles);
  s.read("horizon", c.lightdark_horizon);
  s.read("light", c.lightdark.light);
  s.read("goal_radius", c.lightdark.goal_radius);
  s.read("stop_reward", c.lightdark.stop_reward);
  s.read("init_mean", c.lightdark.init_mean);
  s.read("init_std", c.lightdark.init_std);
  s.read("discount", c.lightdark.discount);
  s.finish();
}

void read_cas(Section s, RunConfig& c) {
  s.read("horizon", c.cas_horizon);
  s.read("dt", c.cas.dt);
  s.read("rate", c.cas.rate);
  s.read("sigma_intruder", c.cas.sigma_intruder);
  s.read("sigma_h", c.cas.sigma_h);
  s.read("sigma_hdot", c.cas.sigma_hdot);
  s.read("h0_std", c.cas.h0_std);
  s.read("hdot0_std", c.cas.hdot0_std);
  s.read("tau0", c.cas.tau0);
  s.read("nmac_altitude", c.cas.nmac_altitude);
  s.read("alert_cost", c.cas.alert_cost);
  s.finish();
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string_view to_string(EnvironmentId id) {
  switch (id) {
    case EnvironmentId::LightDark:
      return "lightdark";
    case EnvironmentId::Cas:
      return "cas";
    case EnvironmentId::Toy:
      return "toy";
  }
  return "unknown";
}

void RunConfig::validate() const {
  try {
    variant.validate();
    if (!(target_threshold >= 0.0 && target_threshold <= 1.0))
      throw ConfigError("target_threshold must lie in [0, 1]");
    if (net_depth == 0 || net_width == 0) throw ConfigError("network depth and width must be positive");
    if (eval.n_episodes == 0 || eval.workers == 0) throw ConfigError("eval.n_episodes and eval.workers must be positive");
    if (lightdark_particles == 0) throw ConfigError("lightdark.n_particles must be positive");
    if (lightdark_horizon == 0 || cas_horizon == 0) throw ConfigError("horizons must be positive");
    LightDarkParams ld = lightdark;
    ld.target_threshold = effective_threshold();
    ld.variant = variant;
    ld.validate();
    CasParams cp = cas;
    cp.target_threshold = effective_threshold();
    cp.variant = variant;
    cp.validate();
    learner.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError("config syntax error at " + position_of(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  Section root(j, "config");
  RunConfig c;

  std::string env;
  root.read("environment", env);
  if (env.empty()) throw ConfigError("config.environment is required");
  c.environment = parse_environment(env);

  if (auto v = root.sub("variant")) {
    std::string mode = "cc";
    v->read("mode", mode);
    v->read("lambda", c.variant.penalty);
    v->finish();
    if (mode == "cc") c.variant.mode = RewardMode::ChanceConstrained;
    else if (mode == "penalty") c.variant.mode = RewardMode::Penalty;
    else throw ConfigError("variant.mode: expected cc or penalty");
  }
  root.read("target_threshold", c.target_threshold);
  if (auto s = root.sub("lightdark")) read_lightdark(*s, c);
  if (auto s = root.sub("cas")) read_cas(*s, c);
  if (auto s = root.sub("network")) {
    s->read("depth", c.net_depth);
    s->read("width", c.net_width);
    s->finish();
  }
  if (auto s = root.sub("planner")) read_planner(*s, c.learner.planner);
  if (auto s = root.sub("train")) read_train(*s, c.learner.train);
  if (auto s = root.sub("learner")) {
    s->read("n_iterations", c.learner.n_iterations);
    s->read("n_data", c.learner.n_data);
    s->read("workers", c.learner.workers);
    s->read("buffer_window", c.learner.buffer_window);
    s->read("record_wall_time", c.learner.record_wall_time);
    s->finish();
  }
  if (auto s = root.sub("eval")) {
    s->read("n_episodes", c.eval.n_episodes);
    s->read("seed", c.eval.seed);
    s->read("workers", c.eval.workers);
    s->finish();
  }
  root.read("seed", c.learner.seed);
  std::string out;
  root.read("output_dir", out);
  if (!out.empty()) c.output_dir = out;
  root.finish();

  c.learner.planner.target_threshold = c.effective_threshold();
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const RunConfig& c) {
  const auto& p = c.learner.planner;
  const auto& t = c.learner.train;
  json j;
  j["environment"] = to_string(c.environment);
  j["variant"] = {{"mode", c.variant.mode == RewardMode::Penalty ? "penalty" : "cc"}, {"lambda", c.variant.penalty}};
  j["target_threshold"] = c.target_threshold;
  j["lightdark"] = {{"n_particles", c.lightdark_particles}, {"horizon", c.lightdark_horizon},
                    {"light", c.lightdark.light},           {"goal_radius", c.lightdark.goal_radius},
                    {"stop_reward", c.lightdark.stop_reward}, {"init_mean", c.lightdark.init_mean},
                    {"init_std", c.lightdark.init_std},     {"discount", c.lightdark.discount}};
  j["cas"] = {{"horizon", c.cas_horizon},
              {"dt", c.cas.dt},
              {"rate", c.cas.rate},
              {"sigma_intruder", c.cas.sigma_intruder},
              {"sigma_h", c.cas.sigma_h},
              {"sigma_hdot", c.cas.sigma_hdot},
              {"h0_std", c.cas.h0_std},
              {"hdot0_std", c.cas.hdot0_std},
              {"tau0", c.cas.tau0},
              {"nmac_altitude", c.cas.nmac_altitude},
              {"alert_cost", c.cas.alert_cost}};
  j["network"] = {{"depth", c.net_depth}, {"width", c.net_width}};
  j["planner"] = {{"n_online", p.n_online},
                  {"depth", p.depth},
                  {"exploration", p.exploration},
                  {"k_action", p.k_action ? json(*p.k_action) : json(nullptr)},
                  {"alpha_action", p.alpha_action},
                  {"k_belief", p.k_belief},
                  {"alpha_belief", p.alpha_belief},
                  {"aci_step", p.aci_step},
                  {"failure_discount", p.failure_discount},
                  {"temperature", p.temperature},
                  {"adaptation", p.adaptation},
                  {"init_node_visits", p.init_node_visits},
                  {"init_edge_visits", p.init_edge_visits},
                  {"init_q", p.init_q},
                  {"init_failure", failure_init_name(p.init_failure)}};
  j["train"] = {{"learning_rate", t.learning_rate},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"epsilon", t.epsilon},
                {"weight_decay", t.weight_decay},
                {"batch_size", t.batch_size},
                {"epochs", t.epochs},
                {"value_loss", t.value_loss == ValueLoss::Absolute ? "absolute" : "squared"}};
  j["learner"] = {{"n_iterations", c.learner.n_iterations},
                  {"n_data", c.learner.n_data},
                  {"workers", c.learner.workers},
                  {"buffer_window", c.learner.buffer_window},
                  {"record_wall_time", c.learner.record_wall_time}};
  j["eval"] = {{"n_episodes", c.eval.n_episodes}, {"seed", c.eval.seed}, {"workers", c.eval.workers}};
  j["seed"] = c.learner.seed;
  j["output_dir"] = c.output_dir.string();
  return j.dump(2) + "\n";
}

}  // namespace czero::app
