#include <benchmark/benchmark.h>

#include <random>

#include "udist/discrete.hpp"
#include "udist/fractal.hpp"
#include "udist/measure.hpp"
#include "udist/parallel.hpp"

using namespace udist;

namespace {

GridIndicator cantor_strip(int k) {
  const double delta = std::ldexp(1.0, -k);
  const auto stage = cantor_stage({1, 2, cantor_stage_for_delta(1, 2, Rational::from_double(delta))});
  return rasterize({stage, IntervalUnion({{Rational(0), Rational(2)}})}, delta, delta / 2, 1.5);
}

PointSet uniform_box(std::size_t n, int d) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, std::pow(static_cast<double>(n), 1.0 / d));
  std::vector<Vector> pts;
  while (pts.size() < n) {
    Vector v(d);
    for (int a = 0; a < d; ++a) v[a] = u(rng);
    bool clash = false;
    for (const auto& p : pts) clash = clash || distance(p, v) <= 1e-3;
    if (!clash) pts.push_back(v);
  }
  return PointSet(d, std::move(pts), 1e-3);
}

// state.range(1): worker threads, 0 for the runtime default.
void threads_from(benchmark::State& state) { set_threads(static_cast<int>(state.range(1))); }

void BM_DeltaGrid(benchmark::State& state) {
  threads_from(state);
  const auto g = cantor_strip(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measure_D_delta_grid(g));
  set_threads(0);
}

void BM_DeltaGridReference(benchmark::State& state) {
  const auto g = cantor_strip(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(measure_D_delta_grid_reference(g));
}

void BM_CountGrid(benchmark::State& state) {
  threads_from(state);
  const auto P = uniform_box(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(count_unit_pairs_grid(P));
  set_threads(0);
}

void BM_CountBruteforce(benchmark::State& state) {
  const auto P = uniform_box(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(count_unit_pairs_bruteforce(P));
}

}  // namespace

BENCHMARK(BM_DeltaGrid)->ArgsProduct({{4, 5}, {1, 0}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DeltaGridReference)->Args({4, 0})->Args({5, 0})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountGrid)->ArgsProduct({{1000, 4000}, {1, 0}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountBruteforce)->Args({1000, 0})->Args({4000, 0})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
