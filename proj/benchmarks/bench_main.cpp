#include <benchmark/benchmark.h>

#include "efalcon/env.hpp"
#include "efalcon/falcon.hpp"
#include "efalcon/harness.hpp"
#include "efalcon/linmodel.hpp"

using namespace efalcon;

namespace {

DataBatch sample_batch(std::size_t n, std::uint64_t seed, bool follow_fhat) {
  EnvSpec spec;
  spec.kind = EnvKind::SensitivityFamily;
  spec.seed = seed;
  Environment env(spec);
  Rng coin(seed, streams::kAgent);
  DataBatch batch;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = env.sample_context();
    const Arm a = follow_fhat ? env.best_linear_fit().best_arm(x) : coin.below(2);
    batch.append(x, a, env.sample_reward(x, a));
  }
  return batch;
}

void BM_FitOls(benchmark::State& state) {
  const auto batch = sample_batch(static_cast<std::size_t>(state.range(0)), 1, false);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(batch, {2, 1}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FitOls)->Range(1 << 8, 1 << 16);

void BM_ConstrainedFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto active = sample_batch(n, 2, true);
  const auto cons = make_constraint(sample_batch(n / 8, 3, false), 0.02, {2, 1});
  for (auto _ : state) benchmark::DoNotOptimize(constrained_fit(active, cons, 1e-6, {2, 1}));
}
BENCHMARK(BM_ConstrainedFit)->Range(1 << 10, 1 << 16);

void BM_ActionKernel(benchmark::State& state) {
  const LinearModel f({4, 1}, {0.1, 0.5, 0.3, 0.2, 0.7, -0.4, 0.2, 0.1});
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(action_kernel(f, Context(rng.uniform()), 12.0));
}
BENCHMARK(BM_ActionKernel);

void BM_RunOne(benchmark::State& state) {
  RunConfig config;
  config.env.kind = EnvKind::SensitivityFamily;
  config.horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_one(config, 1, {false, false}));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunOne)->Arg(1 << 12)->Arg(1 << 14)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
