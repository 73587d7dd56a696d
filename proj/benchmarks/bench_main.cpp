#include <benchmark/benchmark.h>

#include <cstdint>

#include "margin_gate/freqresp.hpp"
#include "margin_gate/margins.hpp"
#include "margin_gate/netsynth.hpp"
#include "margin_gate/pipeline.hpp"
#include "margin_gate/regions.hpp"

using namespace margin_gate;

namespace {

CaseFixture dense_case(std::size_t points) {
    CaseFixture fx = random_case(233, 3, 1.0, 1e4);
    fx.grid = FrequencyGrid::log_spaced(1.0, 1e4, points);
    return fx;
}

FrequencyResponse l_old_of(const CaseFixture& fx) {
    const StudyInputs in = study_from_case(fx);
    std::vector<Complex> v(in.z_net_old.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = in.z_net_old[i] / in.z_ppm_existing[i];
    CurveMeta meta;
    meta.unit = Unit::Dimensionless;
    return FrequencyResponse(in.z_net_old.grid(), std::move(v), meta);
}

void BM_ValueAt(benchmark::State& state) {
    const auto l = l_old_of(dense_case(static_cast<std::size_t>(state.range(0))));
    double f = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(value_at(l, f));
        f = f * 1.0137;
        if (f > 1e4) f = 1.0;
    }
}
BENCHMARK(BM_ValueAt)->Arg(2000)->Arg(10000);

void BM_FindGainCrossovers(benchmark::State& state) {
    const auto l = l_old_of(dense_case(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(find_crossovers(l, CrossoverKind::Gain));
}
BENCHMARK(BM_FindGainCrossovers)->Arg(2000)->Arg(10000);

void BM_WindingNumber(benchmark::State& state) {
    const auto l = l_old_of(dense_case(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(winding_number(l));
}
BENCHMARK(BM_WindingNumber)->Arg(2000)->Arg(10000);

void BM_Assess(benchmark::State& state) {
    const StudyInputs in = study_from_case(dense_case(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(assess(in, {}));
}
BENCHMARK(BM_Assess)->Arg(2000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
