#include "czero/eval.hpp"

#include <array>
#include <utility>

namespace czero {

namespace {

constexpr std::array<std::pair<EvalMode, std::string_view>, 6> kModeNames{{
    {EvalMode::Full, "full"},
    {EvalMode::NoAdaptation, "no_adaptation"},
    {EvalMode::DmctsNoNet, "dmcts_no_net"},
    {EvalMode::RawPolicy, "raw_policy"},
    {EvalMode::RawValue, "raw_value"},
    {EvalMode::RawFailure, "raw_failure"},
}};

}  // namespace

std::optional<EvalMode> parse_eval_mode(std::string_view name) {
  for (const auto& [mode, n] : kModeNames)
    if (n == name) return mode;
  return std::nullopt;
}

std::string_view to_string(EvalMode mode) {
  for (const auto& [m, n] : kModeNames)
    if (m == mode) return n;
  return "unknown";
}

Action argmax_action(std::span<const double> policy) {
  if (policy.empty()) throw ContractViolation("argmax_action: empty policy");
  Action best = 0;
  for (Action a = 1; a < policy.size(); ++a)
    if (policy[a] > policy[best]) best = a;
  return best;
}

EvalReport make_report(std::vector<EpisodeOutcome> episodes) {
  EvalReport r;
  r.episodes = std::move(episodes);
  if (r.episodes.empty()) return r;
  std::vector<double> rets;
  std::vector<double> fails;
  for (const auto& e : r.episodes) {
    rets.push_back(e.ret);
    fails.push_back(e.failed ? 1.0 : 0.0);
  }
  const auto a = mean_stderr(rets);
  const auto b = mean_stderr(fails);
  r.mean_return = a.mean;
  r.stderr_return = a.sem;
  r.p_fail = b.mean;
  r.stderr_pfail = b.sem;
  return r;
}

}  // namespace czero
