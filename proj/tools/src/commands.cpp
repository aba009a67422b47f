#include "czero_app/commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <system_error>

#include <czero/net.hpp>

namespace czero::app {

namespace fs = std::filesystem;

namespace {

template <class F>
void with_environment(const RunConfig& c, F&& f) {
  switch (c.environment) {
    case EnvironmentId::LightDark: {
      LightDarkParams p = c.lightdark;
      p.target_threshold = c.effective_threshold();
      p.variant = c.variant;
      const auto mdp = make_lightdark_mdp(p, c.lightdark_particles, c.lightdark_horizon);
      f(mdp);
      return;
    }
    case EnvironmentId::Cas: {
      CasParams p = c.cas;
      p.target_threshold = c.effective_threshold();
      p.variant = c.variant;
      const auto mdp = make_cas_mdp(p, c.cas_horizon);
      f(mdp);
      return;
    }
    case EnvironmentId::Toy: {
      const ToyCcMdp mdp(c.effective_threshold(), c.variant);
      f(mdp);
      return;
    }
  }
}

template <class M>
NetShape net_shape(const RunConfig& c, const M& mdp) {
  Rng rng(0);
  NetShape s;
  s.input_size = mdp.summarize(mdp.initial_belief(rng)).size();
  s.depth = c.net_depth;
  s.width = c.net_width;
  s.num_actions = mdp.num_actions();
  return s;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

RunConfig with_planner_threshold(RunConfig c) {
  c.learner.planner.target_threshold = c.effective_threshold();
  return c;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find(',', start), text.size());
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || r.ec != std::errc{} || r.ptr != item.data() + item.size())
      throw ConfigError("malformed number '" + std::string(item) + "' in list '" + std::string(text) + "'");
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

void write_metrics_row(std::ostream& os, const IterationMetrics& m) {
  os << m.iteration << ',' << format_number(m.mean_return) << ',' << format_number(m.stderr_return) << ','
     << format_number(m.p_fail) << ',' << format_number(m.stderr_pfail) << ',' << format_number(m.loss.value) << ','
     << format_number(m.loss.policy) << ',' << format_number(m.loss.failure) << ',' << format_number(m.wall_s)
     << '\n';
}

std::vector<IterationMetrics> cmd_train(const RunConfig& config_in, const fs::path& out_dir) {
  const RunConfig config = with_planner_threshold(config_in);
  fs::create_directories(out_dir);
  {
    auto cfg = open_output(out_dir / "config.json");
    cfg << dump_config(config);
  }
  std::vector<IterationMetrics> history;
  with_environment(config, [&](const auto& mdp) {
    Rng init_rng(mix_seed(config.learner.seed));
    TripleHeadNet net(net_shape(config, mdp), init_rng);
    save_checkpoint(net, out_dir / "checkpoint.bin");
    auto csv = open_output(out_dir / "metrics.csv");
    csv << kMetricsHeader << '\n' << std::flush;
    history = policy_iteration(mdp, net, config.learner, [&](const IterationMetrics& m, const TripleHeadNet& trained) {
      save_checkpoint(trained, out_dir / ("checkpoint_iter_" + std::to_string(m.iteration) + ".bin"));
      save_checkpoint(trained, out_dir / "checkpoint.bin");
      write_metrics_row(csv, m);
      csv.flush();
      std::cerr << "iteration " << m.iteration << ": return " << format_number(m.mean_return) << " p_fail "
                << format_number(m.p_fail) << '\n';
    });
  });
  return history;
}

EvalReport cmd_eval(const RunConfig& config_in, const std::optional<fs::path>& checkpoint, EvalMode mode,
                    std::size_t n_episodes, std::uint64_t seed, const std::optional<fs::path>& episodes_csv) {
  const RunConfig config = with_planner_threshold(config_in);
  EvalReport report;
  with_environment(config, [&](const auto& mdp) {
    const NetShape shape = net_shape(config, mdp);
    std::optional<TripleHeadNet> net;
    if (checkpoint) {
      net = load_checkpoint(*checkpoint);
      if (net->shape().input_size != shape.input_size || net->shape().num_actions != shape.num_actions)
        throw std::runtime_error("checkpoint network does not match the configured environment");
    } else if (mode == EvalMode::DmctsNoNet) {
      net.emplace(shape);
    } else {
      throw ConfigError("eval mode " + std::string(to_string(mode)) + " needs --checkpoint");
    }
    report = evaluate(mdp, *net, config.learner.planner, mode, n_episodes, seed, config.eval.workers);
  });
  if (episodes_csv) {
    if (episodes_csv->has_parent_path()) fs::create_directories(episodes_csv->parent_path());
    auto out = open_output(*episodes_csv);
    out << "episode,return,failed\n";
    for (std::size_t i = 0; i < report.episodes.size(); ++i)
      out << i << ',' << format_number(report.episodes[i].ret) << ',' << (report.episodes[i].failed ? 1 : 0) << '\n';
  }
  return report;
}

void write_eval_summary(std::ostream& os, EvalMode mode, const EvalReport& r) {
  os << to_string(mode) << ',' << r.episodes.size() << ',' << format_number(r.mean_return) << ','
     << format_number(r.stderr_return) << ',' << format_number(r.p_fail) << ',' << format_number(r.stderr_pfail)
     << '\n';
}

void cmd_sweep_penalty(const RunConfig& config, std::span<const double> lambdas, std::ostream& csv) {
  csv << "lambda,p_fail,stderr_pfail,mean_return,stderr_return\n";
  for (double lambda : lambdas) {
    RunConfig c = config;
    c.variant = {RewardMode::Penalty, lambda};
    c.validate();
    const fs::path dir = config.output_dir / ("penalty_" + format_number(lambda));
    cmd_train(c, dir);
    const auto r = cmd_eval(c, dir / "checkpoint.bin", EvalMode::Full, c.eval.n_episodes, c.eval.seed,
                            dir / "eval_full.csv");
    csv << format_number(lambda) << ',' << format_number(r.p_fail) << ',' << format_number(r.stderr_pfail) << ','
        << format_number(r.mean_return) << ',' << format_number(r.stderr_return) << '\n';
    csv.flush();
  }
}

void cmd_sweep_eta(const RunConfig& config, std::span<const double> etas, std::ostream& csv) {
  csv << "eta," << kMetricsHeader << '\n';
  for (double eta : etas) {
    RunConfig c = config;
    c.learner.planner.aci_step = eta;
    c.validate();
    const auto history = cmd_train(c, config.output_dir / ("eta_" + format_number(eta)));
    for (const auto& m : history) {
      csv << format_number(eta) << ',';
      write_metrics_row(csv, m);
    }
    csv.flush();
  }
}

}  // namespace czero::app
