#include <benchmark/benchmark.h>

#include <czero/envs/lightdark.hpp>
#include <czero/estimator.hpp>
#include <czero/net.hpp>
#include <czero/planner.hpp>

using namespace czero;

static void BM_NetForward(benchmark::State& state) {
  Rng rng(1);
  const TripleHeadNet net({2, 2, static_cast<std::size_t>(state.range(0)), 3}, rng);
  const std::vector<double> x{1.5, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_NetForward)->Arg(16)->Arg(64)->Arg(256);

static void BM_ParticleUpdate(benchmark::State& state) {
  const auto mdp = make_lightdark_mdp({}, static_cast<std::size_t>(state.range(0)));
  Rng rng(2);
  const auto b = mdp.initial_belief(rng);
  for (auto _ : state) benchmark::DoNotOptimize(mdp.updater().update(b.belief, LightDark::kUp, 3.0, rng));
}
BENCHMARK(BM_ParticleUpdate)->Arg(100)->Arg(500)->Arg(2000);

static void BM_PlanLightDark(benchmark::State& state) {
  const auto mdp = make_lightdark_mdp({});
  Rng rng(3);
  const TripleHeadNet net({2, 2, 64, 3}, rng);
  const NetEstimator estimator(net);
  PlannerConfig cfg;
  cfg.n_online = static_cast<std::size_t>(state.range(0));
  cfg.target_threshold = 0.01;
  DeltaMcts<LightDarkMdp> planner(mdp, estimator, cfg);
  const auto root = mdp.initial_belief(rng);
  for (auto _ : state) benchmark::DoNotOptimize(planner.plan(root, rng));
}
BENCHMARK(BM_PlanLightDark)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
