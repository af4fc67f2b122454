// Apache License, Version 2.0, refer to LICENSE.txt

#include <benchmark/benchmark.h>

#include "epinfer/gillespie.hpp"
#include "epinfer/rng.hpp"

namespace {

void bench_sir_full_epidemic(benchmark::State &state) {
  const auto spec = epinfer::sir_spec(4820);
  const epinfer::Params params(2.0, 1.0);
  const epinfer::StateVector init{4800, 20, 0, 0};
  epinfer::RngStream stream(1);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto engine = stream.child("run", rep++).engine();
    auto end = epinfer::gillespie_propagate(spec, params, init, 0.0, 15.0,
                                            engine);
    benchmark::DoNotOptimize(end);
  }
}
BENCHMARK(bench_sir_full_epidemic)->Unit(benchmark::kMillisecond);

void bench_seir_full_epidemic(benchmark::State &state) {
  const auto spec = epinfer::seir_spec(4820);
  const epinfer::Params params(4.0, 1.0, 1.0);
  const epinfer::StateVector init{4800, 0, 20, 0};
  epinfer::RngStream stream(2);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto engine = stream.child("run", rep++).engine();
    auto end = epinfer::gillespie_propagate(spec, params, init, 0.0, 15.0,
                                            engine);
    benchmark::DoNotOptimize(end);
  }
}
BENCHMARK(bench_seir_full_epidemic)->Unit(benchmark::kMillisecond);

void bench_sir_grid_sampling(benchmark::State &state) {
  const auto spec = epinfer::sir_spec(4820);
  const epinfer::Params params(2.0, 1.0);
  const epinfer::StateVector init{4800, 20, 0, 0};
  std::vector<double> grid;
  for (int t = 1; t <= 15; ++t) grid.push_back(double(t));
  epinfer::RngStream stream(3);
  std::uint64_t rep = 0;
  for (auto _ : state) {
    auto engine = stream.child("run", rep++).engine();
    auto traj =
        epinfer::gillespie_run_grid(spec, params, init, 0.0, grid, engine);
    benchmark::DoNotOptimize(traj);
  }
}
BENCHMARK(bench_sir_grid_sampling)->Unit(benchmark::kMillisecond);

}  // namespace
