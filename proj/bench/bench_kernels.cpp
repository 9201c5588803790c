// Serial against OpenMP execution of the main kernels. Arg 0 = serial, 1 = parallel.

#include <benchmark/benchmark.h>

#include "tubecomp/functionals.hpp"
#include "tubecomp/scenario.hpp"

using namespace tubecomp;

namespace {

Execution exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

const ImmersionChart& torus() {
  static const Ambient M = AmbientSpec::parse("euclidean(3)").build();
  static const ImmersionChart chart = ChartSpec::parse("torus_rev(2,1)").build(M);
  return chart;
}

const ImmersionChart& cone_slice() {
  static const Ambient M = AmbientSpec::parse("cone(3,0.8)").build();
  static const ImmersionChart chart = ChartSpec::parse("cone_cross_section(3,0.8,1)").build(M);
  return chart;
}

void BM_SigmaCache(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sigma_cache(torus(), {64, 64}, exec_of(state)));
}

void BM_IntegrateOverSigma(benchmark::State& state) {
  const SigmaIntegrand area = [](const ShapeData&) { return 1.0; };
  for (auto _ : state) benchmark::DoNotOptimize(integrate_over_sigma(torus(), area, {48, 48}, exec_of(state)));
}

void BM_ChernLashof(benchmark::State& state) {
  FunctionalOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(chern_lashof(torus(), opts));
}

void BM_WillmoreCone(benchmark::State& state) {
  FunctionalOptions opts;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(willmore_chen(cone_slice(), opts));
}

void BM_TubeVolumeMc(benchmark::State& state) {
  TubeMcOptions opts;
  opts.samples = 100000;
  opts.seed = 3;
  opts.exec = exec_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(tube_volume_mc(torus(), 0.5, opts));
}

}  // namespace

BENCHMARK(BM_SigmaCache)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_IntegrateOverSigma)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ChernLashof)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_WillmoreCone)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TubeVolumeMc)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
