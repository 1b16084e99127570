// Microbenchmarks for the kernels that dominate sweep and simulation
// runtime. Times are per iteration; counters report derived throughput
// where that is the natural unit.

#include <benchmark/benchmark.h>

#include <cstdint>

#include <mapkit/experiment.hpp>
#include <mapkit/grid.hpp>
#include <mapkit/linalg.hpp>
#include <mapkit/metrics.hpp>
#include <mapkit/model.hpp>
#include <mapkit/rng.hpp>
#include <mapkit/simulate.hpp>

namespace {

mapkit::Matrix random_generator(int order, std::uint64_t seed) {
  mapkit::SplitRng rng(seed);
  mapkit::Matrix Q = mapkit::Matrix::Zero(order, order);
  for (int r = 0; r < order; ++r) {
    for (int c = 0; c < order; ++c)
      if (r != c) Q(r, c) = 0.01 + rng.next_uniform();
    Q(r, r) = -Q.row(r).sum();
  }
  return Q;
}

mapkit::MapModel random_model(int order, std::uint64_t seed) {
  mapkit::SplitRng rng(mapkit::SplitRng::derive(seed, std::uint64_t(order)));
  return mapkit::random_mmpp(order, rng);
}

void BM_Expm(benchmark::State& state) {
  const int order = int(state.range(0));
  const mapkit::Matrix Q = random_generator(order, 7);
  for (auto _ : state)
    benchmark::DoNotOptimize(mapkit::expm(Q, 1.0));
}
BENCHMARK(BM_Expm)->Arg(2)->Arg(4)->Arg(8)->Arg(16)->Arg(32);

void BM_StationaryPair(benchmark::State& state) {
  const auto m = random_model(int(state.range(0)), 11);
  for (auto _ : state)
    benchmark::DoNotOptimize(mapkit::stationary_pair(m));
}
BENCHMARK(BM_StationaryPair)->Arg(4)->Arg(8)->Arg(16);

void BM_DeviationMatrix(benchmark::State& state) {
  const auto m = random_model(int(state.range(0)), 13);
  for (auto _ : state)
    benchmark::DoNotOptimize(mapkit::deviation_matrix(m));
}
BENCHMARK(BM_DeviationMatrix)->Arg(4)->Arg(8)->Arg(16);

// One full verdict report on the default grid: the per-instance cost of
// a sweep is essentially this plus model generation.
void BM_PropertyVerdicts(benchmark::State& state) {
  const auto m = random_model(int(state.range(0)), 17);
  const auto ts = mapkit::TimeGrid{}.points();
  for (auto _ : state)
    benchmark::DoNotOptimize(mapkit::property_verdicts(m, ts, 1e-9));
}
BENCHMARK(BM_PropertyVerdicts)->Arg(4)->Arg(8);

void BM_SweepInstance(benchmark::State& state) {
  mapkit::SweepConfig cfg;
  cfg.orders = {int(state.range(0))};
  cfg.n_instances = 1;
  cfg.n_threads = 1;
  cfg.seed = 19;
  for (auto _ : state)
    benchmark::DoNotOptimize(mapkit::run_sweep(cfg));
}
BENCHMARK(BM_SweepInstance)->Arg(3)->Arg(6);

void BM_SimulateEvents(benchmark::State& state) {
  const auto m = random_model(4, 23);
  mapkit::SimConfig cfg;
  cfg.n_events = std::uint64_t(state.range(0));
  cfg.seed = 29;
  std::uint64_t events = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mapkit::simulate_events(m, cfg));
    events += std::uint64_t(state.range(0));
  }
  state.counters["events/s"] =
      benchmark::Counter(double(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulateEvents)->Arg(10000)->Arg(100000);

void BM_HazardCurve(benchmark::State& state) {
  const auto m = random_model(4, 31);
  const auto sp = mapkit::stationary_pair(m);
  const auto ts = mapkit::TimeGrid{}.points();
  for (auto _ : state)
    benchmark::DoNotOptimize(mapkit::hazard_curve(m, sp.alpha, ts));
}
BENCHMARK(BM_HazardCurve);

}  // namespace

BENCHMARK_MAIN();
