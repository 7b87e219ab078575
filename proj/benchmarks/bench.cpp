#include <benchmark/benchmark.h>

#include <shortpkt/analysis.hpp>
#include <shortpkt/channel.hpp>
#include <shortpkt/optimizer.hpp>
#include <shortpkt/pgf.hpp>
#include <shortpkt/simulator.hpp>

using namespace shortpkt;

namespace {

SystemParams operating_point() {
    // rho = 5 dB, k = 100 bits: the reference operating point used across
    // the docs; eps follows from the blocklength.
    const int n = 100;
    const double eps = error_probability({db_to_linear(5.0), 100, n});
    return SystemParams(1e-3, n, eps, Regime::FrameSync);
}

void BM_ErrorProbability(benchmark::State& state) {
    const ChannelParams ch{db_to_linear(5.0), 100, static_cast<int>(state.range(0))};
    for (auto _ : state) benchmark::DoNotOptimize(error_probability(ch));
}
BENCHMARK(BM_ErrorProbability)->Arg(50)->Arg(200)->Arg(1000);

void BM_DelayPgfSync(benchmark::State& state) {
    // k = 100 bits at 5 dB needs n >= ~100 before eps leaves the unstable zone.
    const int n = static_cast<int>(state.range(0));
    const double eps = error_probability({db_to_linear(5.0), 100, n});
    const SystemParams p(1e-3, n, eps, Regime::FrameSync);
    for (auto _ : state) benchmark::DoNotOptimize(delay_pgf_sync(p));
}
BENCHMARK(BM_DelayPgfSync)->Arg(100)->Arg(150)->Arg(200);

void BM_PeakAgePgfSync(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const double eps = error_probability({db_to_linear(5.0), 100, n});
    const SystemParams p(1e-3, n, eps, Regime::FrameSync);
    for (auto _ : state) benchmark::DoNotOptimize(peak_age_pgf_sync(p));
}
BENCHMARK(BM_PeakAgePgfSync)->Arg(100)->Arg(150);

// Series inversion cost is dominated by the den * (1-s) convolution; the
// double-double path is the default, the plain-double path the comparison.
void BM_TailSeriesDouble(benchmark::State& state) {
    const SystemParams p(1e-3, 100, 0.05, Regime::FrameSync);
    const RationalPgf g = delay_pgf_sync(p);
    for (auto _ : state)
        benchmark::DoNotOptimize(tail_series(g, 256, Precision::Double));
}
BENCHMARK(BM_TailSeriesDouble);

void BM_TailSeriesExtended(benchmark::State& state) {
    const SystemParams p(1e-3, 100, 0.05, Regime::FrameSync);
    const RationalPgf g = delay_pgf_sync(p);
    for (auto _ : state)
        benchmark::DoNotOptimize(tail_series(g, 256, Precision::Extended));
}
BENCHMARK(BM_TailSeriesExtended);

void BM_SaddlepointTail(benchmark::State& state) {
    const RationalPgf g = delay_pgf_sync(operating_point());
    const int d = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(saddlepoint_tail(g, d));
}
BENCHMARK(BM_SaddlepointTail)->Arg(6)->Arg(17);

void BM_NetcalcBound(benchmark::State& state) {
    const SystemParams p = operating_point();
    const int d = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(netcalc_bound(p, d));
}
BENCHMARK(BM_NetcalcBound)->Arg(6)->Arg(17);

// Throughput of the event-driven simulator in recorded bulks per second.
void BM_SimulatorSync(benchmark::State& state) {
    SimConfig cfg{operating_point(),
                  static_cast<std::uint64_t>(state.range(0)), UINT64_MAX, 3, 1};
    std::uint64_t bulks = 0;
    for (auto _ : state) {
        SimStats st = simulate(cfg);
        bulks = st.bulks_observed;
        benchmark::DoNotOptimize(st);
    }
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations() * bulks));
}
BENCHMARK(BM_SimulatorSync)->Arg(1'000'000)->Arg(10'000'000);

} // namespace

BENCHMARK_MAIN();
