#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <czero/envs/cas.hpp>
#include <czero/envs/lightdark.hpp>
#include <czero/envs/toy.hpp>
#include <czero/learner.hpp>
#include <czero/net.hpp>
#include <czero/planner_math.hpp>

namespace czero::app {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvironmentId { LightDark, Cas, Toy };

struct EvalSettings {
  std::size_t n_episodes = 100;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Everything a run needs. Every field but `environment` has a default.
struct RunConfig {
  EnvironmentId environment = EnvironmentId::LightDark;
  EnvVariant variant;
  double target_threshold = 0.01;

  LightDarkParams lightdark;
  std::size_t lightdark_particles = 500;
  std::size_t lightdark_horizon = 60;
  CasParams cas;
  std::size_t cas_horizon = 41;

  std::size_t net_depth = 2;
  std::size_t net_width = 64;

  LearnerConfig learner;
  EvalSettings eval;
  std::filesystem::path output_dir = "out";

  /// Delta_0 the planner and environment enforce; penalty mode is unconstrained.
  double effective_threshold() const noexcept {
    return variant.mode == RewardMode::Penalty ? 1.0 : target_threshold;
  }
  void validate() const;
};

/// Parses JSON text. Syntax errors report line and column; unknown keys and
/// out-of-range values are rejected.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of a fully defaulted config.
std::string dump_config(const RunConfig& config);

std::string_view to_string(EnvironmentId id);

}  // namespace czero::app
