#include <benchmark/benchmark.h>

#include "nodal/arithmetic.hpp"
#include "nodal/estimators.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/nodal_topology.hpp"
#include "nodal/rng.hpp"
#include "nodal/stability.hpp"

using namespace nodal;

namespace {

SpectralMeasure uniform(std::int64_t K) { return parse_preset_string("uniform:" + std::to_string(K)); }

void BM_normal_pair(benchmark::State& state) {
  std::uint64_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(normal_pair(StreamId{1, 2}, i++));
}
BENCHMARK(BM_normal_pair);

void BM_sample(benchmark::State& state) {
  const SpectralMeasure rho = uniform(state.range(0));
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample(rho, StreamId{1, k++}));
}
BENCHMARK(BM_sample)->Arg(64)->Arg(256);

void BM_evaluate_grid(benchmark::State& state) {
  const FieldSample s = sample(uniform(64), StreamId{1, 0});
  const double R = double(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_grid(s, Domain::square(R), 1.0 / 16.0));
  state.SetItemsProcessed(state.iterations() * std::int64_t(square_grid_dim(R, 1.0 / 16.0) * square_grid_dim(R, 1.0 / 16.0)));
}
BENCHMARK(BM_evaluate_grid)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_count_components_plane(benchmark::State& state) {
  const ScalarGrid g = evaluate_grid(sample(uniform(64), StreamId{1, 0}), Domain::square(double(state.range(0))), 1.0 / 16.0);
  for (auto _ : state) benchmark::DoNotOptimize(count_components_plane(g));
  state.SetItemsProcessed(state.iterations() * std::int64_t(g.nx * g.ny));
}
BENCHMARK(BM_count_components_plane)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_count_components_torus(benchmark::State& state) {
  const FieldSample f = sample_torus_wave(state.range(0), StreamId{1, 0});
  const ScalarGrid g = evaluate_grid(f, Domain::torus(), default_spacing(f));
  for (auto _ : state) benchmark::DoNotOptimize(count_components_torus(g));
}
BENCHMARK(BM_count_components_torus)->Arg(65)->Arg(1105)->Unit(benchmark::kMillisecond);

void BM_find_flips(benchmark::State& state) {
  const SpectralMeasure rho = uniform(64);
  const FieldSample s = sample(rho, StreamId{1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(find_flips(s, Domain::square(5.0), default_spacing(rho), {1.0, 0.0}));
}
BENCHMARK(BM_find_flips)->Unit(benchmark::kMillisecond);

void BM_flip_density(benchmark::State& state) {
  const SpectralMeasure rho = uniform(256);
  for (auto _ : state) benchmark::DoNotOptimize(flip_density_detail(rho, {1.0, 1.0}));
}
BENCHMARK(BM_flip_density);

void BM_expected_abs_product(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(expected_abs_product(1.3, 0.7, 0.4));
}
BENCHMARK(BM_expected_abs_product);

void BM_lattice_points(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(lattice_points(state.range(0)));
}
BENCHMARK(BM_lattice_points)->Arg(1105)->Arg(5525)->Arg(1000000000);

void BM_cilleruelo_candidates(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(cilleruelo_candidates(state.range(0)));
}
BENCHMARK(BM_cilleruelo_candidates)->Arg(100000)->Arg(10000000)->Unit(benchmark::kMillisecond);

void BM_stability_profile(benchmark::State& state) {
  const FieldSample s = sample(uniform(128), StreamId{1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(stability_profile(s, Domain::square(5.0), 1.0 / 16.0));
}
BENCHMARK(BM_stability_profile)->Unit(benchmark::kMillisecond);

void BM_estimate_cns(benchmark::State& state) {
  const SpectralMeasure rho = uniform(64);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_cns(rho, {2.0, 4.0, 8.0}, 20, 1));
}
BENCHMARK(BM_estimate_cns)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
