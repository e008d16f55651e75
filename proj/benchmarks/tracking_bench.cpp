#include <benchmark/benchmark.h>

#include "fsqkd/tracking.hpp"

namespace {

using namespace fsqkd;

tracking::WanderProcess bench_process() {
    tracking::WanderProcess p;
    p.rms = 0.02;
    p.bandwidth_hz = 100.0;
    p.sample_rate_hz = 10e3;
    p.duration_s = 1.0;
    p.seed = 5;
    return p;
}

void BM_GenerateWander(benchmark::State& state) {
    const auto p = bench_process();
    for (auto _ : state) {
        auto series = tracking::generate_wander(p);
        benchmark::DoNotOptimize(series);
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_GenerateWander);

void BM_ClosedLoop(benchmark::State& state) {
    const auto p = bench_process();
    tracking::TrackingLoopConfig c;
    c.pid = tracking::tune_pid(c);
    for (auto _ : state) {
        auto result = tracking::closed_loop_sim(p, c);
        benchmark::DoNotOptimize(result);
    }
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_ClosedLoop);

} // namespace
