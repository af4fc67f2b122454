// Apache License, Version 2.0, refer to LICENSE.txt

#include <benchmark/benchmark.h>

#include "epinfer/gillespie.hpp"
#include "epinfer/observation.hpp"
#include "epinfer/particle_filter.hpp"
#include "epinfer/rng.hpp"

namespace {

// One synthetic data set shared across all filter benchmarks.
struct FilterFixture {
  epinfer::ModelSpec spec = epinfer::sir_spec(4820);
  epinfer::Params params{2.0, 1.0};
  epinfer::StateVector init{4800, 20, 0, 0};
  epinfer::ObservationModel model = epinfer::gaussian_observation(0.01);
  epinfer::ObservedSeries series;

  FilterFixture() {
    std::vector<double> grid;
    for (int t = 1; t <= 15; ++t) grid.push_back(double(t));
    epinfer::RngStream stream(11);
    auto sim_engine = stream.child("sim").engine();
    const auto traj =
        epinfer::gillespie_run_grid(spec, params, init, 0.0, grid, sim_engine);
    auto obs_engine = stream.child("obs").engine();
    series = epinfer::simulate_observation(spec, model, traj, obs_engine);
  }
};

void bench_bootstrap_filter(benchmark::State &state) {
  static const FilterFixture fx;
  epinfer::FilterOptions opts;
  opts.n_particles = int(state.range(0));
  epinfer::RngStream stream(21);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto result = epinfer::particle_filter(fx.spec, fx.params, fx.model,
                                           fx.series, fx.init, 0.0, opts,
                                           stream.child("pf", rep++));
    benchmark::DoNotOptimize(result.log_likelihood);
  }
}
BENCHMARK(bench_bootstrap_filter)
    ->Arg(100)
    ->Arg(300)
    ->Arg(1000)
    ->Unit(benchmark::kMillisecond);

void bench_bootstrap_filter_with_history(benchmark::State &state) {
  static const FilterFixture fx;
  epinfer::FilterOptions opts;
  opts.n_particles = 300;
  opts.store_history = true;
  epinfer::RngStream stream(22);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto result = epinfer::particle_filter(fx.spec, fx.params, fx.model,
                                           fx.series, fx.init, 0.0, opts,
                                           stream.child("pf", rep++));
    benchmark::DoNotOptimize(result.log_likelihood);
  }
}
BENCHMARK(bench_bootstrap_filter_with_history)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
