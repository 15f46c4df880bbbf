#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "thzrel/delay.hpp"
#include "thzrel/geometry.hpp"
#include "thzrel/numerics.hpp"
#include "thzrel/simulator.hpp"

using namespace thzrel;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

ChannelParams preset_channel() {
  ChannelParams ch;
  ch.link_distance_m = 1.92;
  return ch;
}

}  // namespace

static void BM_ConvolveDirect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1);
  const auto b = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(detail::linear_convolve_direct(a, b, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveDirect)->RangeMultiplier(4)->Range(64, 16384)->Complexity(benchmark::oNSquared);

static void BM_ConvolveFft(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = noise(n, 1);
  const auto b = noise(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(detail::linear_convolve_fft(a, b, n));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolveFft)->RangeMultiplier(4)->Range(64, 1 << 18)->Complexity(benchmark::oNLogN);

static void BM_AnalyzeDelay(benchmark::State& state) {
  ChannelParams ch = preset_channel();
  ch.bandwidth_hz = static_cast<double>(state.range(0)) * 1e9;
  const auto st = interference_stats(DeploymentParams{}, 1.0, aperture_area(1e12));
  for (auto _ : state) benchmark::DoNotOptimize(analyze_delay(ch, st, 1350.0, 2000.0));
}
BENCHMARK(BM_AnalyzeDelay)->Arg(8)->Arg(10)->Arg(14)->Unit(benchmark::kMillisecond);

static void BM_RunTandem(benchmark::State& state) {
  SimConfig c;
  c.channel = preset_channel();
  c.arrival_rate = 1350.0;
  c.processing_rate = 2000.0;
  c.n_requests = static_cast<std::size_t>(state.range(0));
  c.warmup = c.n_requests / 10;
  c.keep_records = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_tandem(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RunTandem)->Arg(10'000)->Arg(110'000)->Unit(benchmark::kMillisecond);

static void BM_SampleMhcpp(benchmark::State& state) {
  const DeploymentParams w = interference_window(DeploymentParams{});
  Engine e = make_engine(1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_mhcpp(w, e));
}
BENCHMARK(BM_SampleMhcpp)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
