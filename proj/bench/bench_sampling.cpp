// Serial reference vs OpenMP driver on the two heaviest sampled kernels.
#include "sublab/geometries.hpp"
#include "sublab/obstruction.hpp"
#include "sublab/sampling.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace sublab;

void BM_Fatness(benchmark::State& state) {
  const auto bundle = hopf_bundle(HopfFlavor::quaternionic);
  FatnessOptions opts;
  opts.points = 64;
  opts.directions = 20;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(fatness(bundle, opts).min_singular_value);
  state.SetLabel(opts.parallel ? "parallel" : "serial");
}

void BM_TheoremReport(benchmark::State& state) {
  const PullbackBundle b(
      compose(hopf_map(HopfFlavor::complex), perturbation_diffeo(3, 0.3, Vec::Unit(4, 1))),
      hopf_bundle(HopfFlavor::complex));
  TheoremOptions opts;
  opts.samples = 64;
  opts.kernel_directions = 10;
  opts.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(theorem_report(b, opts).max_obstruction);
  state.SetLabel(opts.parallel ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_Fatness)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TheoremReport)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  sublab::apply_thread_cap();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
