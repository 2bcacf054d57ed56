#include <benchmark/benchmark.h>

#include "fiberdyn/basin.hpp"
#include "fiberdyn/families.hpp"
#include "fiberdyn/fecld.hpp"

using namespace fiberdyn;

namespace {

basin::RasterSpec raster(std::size_t n) {
    basin::RasterSpec s;
    s.x_lo = s.y_lo = -4;
    s.x_hi = s.y_hi = 4;
    s.nx = s.ny = n;
    s.attractors = {State{0, 0}};
    return s;
}

void BM_raster_serial(benchmark::State& state) {
    const auto map = families::propoexemple_map(0.8).reduction.planar;
    const auto spec = raster(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(basin::rasterize_2d_serial(map, spec));
}

void BM_raster_openmp(benchmark::State& state) {
    const auto map = families::propoexemple_map(0.8).reduction.planar;
    const auto spec = raster(static_cast<std::size_t>(state.range(0)));
    const ParallelOptions par{Execution::parallel, static_cast<int>(state.range(1))};
    for (auto _ : state) benchmark::DoNotOptimize(basin::rasterize_2d(map, spec, par));
}

// The H4 evidence kernel: V(p_j) tabulated over 1e6 terms and summed pairwise.
void BM_evidence_sum(benchmark::State& state, Execution execution) {
    const auto env = families::example_c_envelope(0.5, 0.5);
    const auto p = fecld::DecaySequence::power_law(0.5, 1.5);
    const ParallelOptions par{execution, 0};
    for (auto _ : state) {
        const auto v = tabulate(1'000'000, [&](std::size_t j) { return env.V(p[j]); }, par);
        benchmark::DoNotOptimize(pairwise_sum(v));
    }
}

}  // namespace

BENCHMARK(BM_raster_serial)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_raster_openmp)->ArgsProduct({{200, 400}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_evidence_sum, serial, Execution::serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_evidence_sum, openmp, Execution::parallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
