// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_PARTICLE_FILTER_HPP
#define EPINFER_PARTICLE_FILTER_HPP

#include <vector>

#include "epinfer/gillespie.hpp"
#include "epinfer/model.hpp"
#include "epinfer/observation.hpp"
#include "epinfer/rng.hpp"

namespace epinfer {

struct FilterOptions {
  int n_particles = 100;
  int n_threads = 1;
  bool store_history = false;
};

// Output of one bootstrap filter pass. log_likelihood is the unbiased
// evidence estimate sum_k [logsumexp(w_k) - log N]. When every particle
// weight at some step is -infinity, `failed` is set, log_likelihood is
// -infinity, and processing stops at that step.
//
// With store_history, `particles[k]` holds the pre-resampling propagated
// states of step k (row 0 repeats the initial state) and `resample[k][i]`
// the index into particles[k] that seeded particle i of step k+1; the final
// row's resampling supplies terminal draws for path sampling.
struct ParticleSystem {
  int n_particles = 0;
  double t0 = 0.0;
  StateVector init{};
  std::vector<double> times;
  bool failed = false;
  int failed_step = -1;
  double log_likelihood = 0.0;
  std::vector<double> step_log_likelihood;
  std::vector<std::vector<StateVector>> particles;
  std::vector<std::vector<int>> resample;
};

// Bootstrap particle filter for the jump process observed through `model`.
// Particles start as a point mass on `init` at t0 (the initial state is
// treated as known); step k propagates every particle to times[k] with the
// exact simulator, weights it by the emission density of row k, accumulates
// the evidence increment, and resamples multinomially back to uniform
// weights. series.times.front() must exceed t0.
//
// When params.p_obs is set it overrides the detection probability of a
// binomial `model`, making p_obs available to parameter inference.
//
// Reproducibility: particle i of step k draws from stream.child("prop", k, i)
// and step k resamples from stream.child("resample", k), so results are
// identical for any n_threads.
ParticleSystem particle_filter(const ModelSpec &spec, const Params &params,
                               const ObservationModel &model,
                               const ObservedSeries &series,
                               const StateVector &init, double t0,
                               const FilterOptions &options,
                               const RngStream &stream);

// Draws one trajectory from the smoothing distribution of a stored filter
// pass: picks a terminal particle through the final resampling pass and
// walks its ancestry back to t0. Requires store_history and a clean run.
Trajectory sample_path(const ParticleSystem &system, Xoshiro256pp &engine);

}  // namespace epinfer

#endif  // EPINFER_PARTICLE_FILTER_HPP
