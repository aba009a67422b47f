#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "czero_app/commands.hpp"
#include "czero_app/config.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace czero::app;
  namespace fs = std::filesystem;

  CLI::App app{"Chance-constrained belief-space planning: policy iteration with Delta-MCTS"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  auto* train = app.add_subcommand("train", "Run policy iteration and write metrics and checkpoints");
  train->add_option("--config", config_path, "JSON run configuration")->required();
  train->add_option("--seed", seed, "Base seed (overrides the config)");
  train->add_option("--out", out, "Output directory (overrides the config)");

  std::string checkpoint;
  std::string mode_name;
  std::optional<std::size_t> episodes;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint in one of the ablation modes");
  eval->add_option("--checkpoint", checkpoint, "Network checkpoint (optional for dmcts_no_net)");
  eval->add_option("--config", config_path, "JSON run configuration")->required();
  eval->add_option("--mode", mode_name,
                   "full | no_adaptation | dmcts_no_net | raw_policy | raw_value | raw_failure")
      ->required();
  eval->add_option("--episodes", episodes, "Number of evaluation episodes");
  eval->add_option("--seed", seed, "Evaluation seed");
  eval->add_option("--out", out, "Write per-episode rows to this CSV file");

  std::string list;
  auto* sweep_penalty = app.add_subcommand("sweep-penalty", "Train and evaluate one penalty-mode run per lambda");
  sweep_penalty->add_option("--config", config_path, "JSON run configuration")->required();
  sweep_penalty->add_option("--lambdas", list, "Comma-separated penalties")->required();

  auto* sweep_eta = app.add_subcommand("sweep-eta", "Train one run per ACI step size");
  sweep_eta->add_option("--config", config_path, "JSON run configuration")->required();
  sweep_eta->add_option("--etas", list, "Comma-separated step sizes")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  RunConfig config;
  try {
    config = load_config(config_path);
    if (*train && seed) config.learner.seed = *seed;
    if (*train && out) config.output_dir = *out;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*train) {
      cmd_train(config, config.output_dir);
    } else if (*eval) {
      const auto mode = czero::parse_eval_mode(mode_name);
      if (!mode) {
        std::cerr << "config error: unknown eval mode '" << mode_name << "'\n";
        return kConfigError;
      }
      std::optional<fs::path> ckpt;
      if (!checkpoint.empty()) ckpt = checkpoint;
      std::optional<fs::path> rows;
      if (out) rows = *out;
      const auto report =
          cmd_eval(config, ckpt, *mode, episodes.value_or(config.eval.n_episodes), seed.value_or(config.eval.seed), rows);
      std::cout << kEvalHeader << '\n';
      write_eval_summary(std::cout, *mode, report);
    } else if (*sweep_penalty) {
      const auto lambdas = parse_number_list(list);
      fs::create_directories(config.output_dir);
      std::ofstream csv(config.output_dir / "sweep_penalty.csv", std::ios::binary);
      std::ostringstream buf;
      cmd_sweep_penalty(config, lambdas, buf);
      csv << buf.str();
      std::cout << buf.str();
    } else if (*sweep_eta) {
      const auto etas = parse_number_list(list);
      fs::create_directories(config.output_dir);
      std::ofstream csv(config.output_dir / "sweep_eta.csv", std::ios::binary);
      std::ostringstream buf;
      cmd_sweep_eta(config, etas, buf);
      csv << buf.str();
      std::cout << buf.str();
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
