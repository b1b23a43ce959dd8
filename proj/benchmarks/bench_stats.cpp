#include <benchmark/benchmark.h>

#include <flows/rng.hpp>
#include <flows/stats.hpp>

namespace {

std::vector<bool> outcomes(std::size_t n) {
  flows::Xoshiro256 rng(1);
  std::vector<bool> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = rng.below(2) == 1;
  return v;
}

void BM_BootstrapCi(benchmark::State& state) {
  const auto v = outcomes(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flows::bootstrap_ci(v));
}
BENCHMARK(BM_BootstrapCi)->Arg(50)->Arg(200)->Arg(1000);

void BM_Xoshiro(benchmark::State& state) {
  flows::Xoshiro256 rng(42);
  for (auto _ : state) benchmark::DoNotOptimize(rng());
}
BENCHMARK(BM_Xoshiro);

void BM_SlidingWindow(benchmark::State& state) {
  std::vector<flows::DatedOutcome> v;
  flows::Xoshiro256 rng(3);
  for (int m = 0; m < 24; ++m) {
    const auto month = flows::add_months(flows::parse_date("2020-01-01"), m);
    for (int i = 0; i < 20; ++i) v.push_back({month, rng.below(2) == 1});
  }
  for (auto _ : state) benchmark::DoNotOptimize(flows::sliding_window(v));
}
BENCHMARK(BM_SlidingWindow);

}  // namespace

BENCHMARK_MAIN();
