#include <benchmark/benchmark.h>

#include "truncchain/chaining.hpp"
#include "truncchain/estimator.hpp"
#include "truncchain/function_class.hpp"
#include "truncchain/gaussian.hpp"
#include "truncchain/measure.hpp"
#include "truncchain/verify.hpp"

using namespace truncchain;

static void BM_BuildGreedy(benchmark::State& state) {
  const auto cls = interval_indicators(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_admissible(cls, Metric::L2));
  state.SetLabel(std::to_string(cls->size()) + " functions");
}
BENCHMARK(BM_BuildGreedy)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_BuildRefined(benchmark::State& state) {
  const auto cls = interval_indicators(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_admissible(cls, Metric::L2, {.refine = true}));
  state.SetLabel(std::to_string(cls->size()) + " functions");
}
BENCHMARK(BM_BuildRefined)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Decompose(benchmark::State& state) {
  const auto seq = build_admissible(interval_indicators(static_cast<std::size_t>(state.range(0))), Metric::L2);
  for (auto _ : state) benchmark::DoNotOptimize(decompose(seq));
}
BENCHMARK(BM_Decompose)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

static void BM_ModifiedProcess(benchmark::State& state) {
  const ChainDecomposition decomp(build_admissible(interval_indicators(16), Metric::L2));
  const EstimatorConfig config{1.0, SqrtN{}, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(ModifiedProcess(decomp, config));
}
BENCHMARK(BM_ModifiedProcess)->Arg(64)->Arg(4096)->Unit(benchmark::kMicrosecond);

static void BM_SampleCounts(benchmark::State& state) {
  const DiscreteSpace space(std::vector<double>(16, 1.0 / 16.0));
  const auto n = static_cast<std::size_t>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    const auto sample = draw_sample(space, n, ++seed);
    benchmark::DoNotOptimize(atom_counts(space, sample));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SampleCounts)->Arg(256)->Arg(4096);

static void BM_ExactBias(benchmark::State& state) {
  const auto pair = heavy_tail_pair(HeavyTailSpec{});
  const ChainDecomposition decomp(build_admissible(pair.cls, Metric::L2));
  for (auto _ : state) benchmark::DoNotOptimize(exact_bias(decomp, EstimatorConfig{1.0, SqrtN{}, 1024}));
}
BENCHMARK(BM_ExactBias)->Unit(benchmark::kMicrosecond);

static void BM_EnumerationOracle(benchmark::State& state) {
  const ChainDecomposition decomp(build_admissible(interval_indicators(4), Metric::L2));
  const EstimatorConfig config{1.0, SqrtN{}, static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(enumeration_oracle(decomp, 3, config));
}
BENCHMARK(BM_EnumerationOracle)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_GaussianDraws(benchmark::State& state) {
  const auto model = build_full_model(*interval_indicators(16), CovarianceMode::Isonormal);
  for (auto _ : state) benchmark::DoNotOptimize(sample_gaussian(model, 1000, 7, 1));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_GaussianDraws)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
