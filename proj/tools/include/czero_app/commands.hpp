#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <czero/eval.hpp>
#include <czero/learner.hpp>

#include "czero_app/config.hpp"

namespace czero::app {

/// Shortest round-trip decimal text for CSV cells.
std::string format_number(double x);

/// "1e-5,0.01" -> {1e-5, 0.01}. Throws ConfigError on malformed items.
std::vector<double> parse_number_list(std::string_view text);

inline constexpr std::string_view kMetricsHeader =
    "iteration,mean_return,stderr_return,p_fail,stderr_pfail,loss_v,loss_p,loss_f,wall_s";

void write_metrics_row(std::ostream& os, const IterationMetrics& m);

/// Policy iteration. Writes `config.json`, `metrics.csv`, `checkpoint.bin`
/// (initial net, then overwritten after every iteration) and
/// `checkpoint_iter_<i>.bin` into `out_dir`.
std::vector<IterationMetrics> cmd_train(const RunConfig& config, const std::filesystem::path& out_dir);

/// Evaluates a checkpoint (optional for dmcts_no_net). When `episodes_csv` is
/// given, per-episode rows are written there.
EvalReport cmd_eval(const RunConfig& config, const std::optional<std::filesystem::path>& checkpoint, EvalMode mode,
                    std::size_t n_episodes, std::uint64_t seed,
                    const std::optional<std::filesystem::path>& episodes_csv = std::nullopt);

inline constexpr std::string_view kEvalHeader = "mode,episodes,mean_return,stderr_return,p_fail,stderr_pfail";
void write_eval_summary(std::ostream& os, EvalMode mode, const EvalReport& report);

/// One penalty-mode training run and full-mode evaluation per lambda.
/// Emits lambda,p_fail,stderr_pfail,mean_return,stderr_return rows.
void cmd_sweep_penalty(const RunConfig& config, std::span<const double> lambdas, std::ostream& csv);

/// One training run per ACI step size; emits eta followed by the metrics columns.
void cmd_sweep_eta(const RunConfig& config, std::span<const double> etas, std::ostream& csv);

}  // namespace czero::app
