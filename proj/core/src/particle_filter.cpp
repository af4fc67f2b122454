// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epinfer/errors.hpp"
#include "epinfer/numeric.hpp"
#include "epinfer/parallel.hpp"

namespace epinfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Multinomial resampling: N categorical draws from the normalised weights,
// taken in index order from a dedicated engine.
std::vector<int> draw_resample_indices(const std::vector<double> &log_weights,
                                       Xoshiro256pp &engine) {
  const int n = static_cast<int>(log_weights.size());
  double hi = kNegInf;
  for (const double w : log_weights) hi = std::fmax(hi, w);

  std::vector<double> cum(log_weights.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += std::exp(log_weights[i] - hi);
    cum[i] = acc;
  }

  std::vector<int> idx(log_weights.size());
  for (int i = 0; i < n; ++i) {
    const double target = engine.uniform_oc() * acc;
    const auto it = std::lower_bound(cum.begin(), cum.end(), target);
    idx[i] = std::min(static_cast<int>(it - cum.begin()), n - 1);
  }
  return idx;
}

}  // namespace

ParticleSystem particle_filter(const ModelSpec &spec, const Params &params,
                               const ObservationModel &model,
                               const ObservedSeries &series,
                               const StateVector &init, double t0,
                               const FilterOptions &options,
                               const RngStream &stream) {
  validate_state(spec, init);
  validate_params(spec, params);
  validate_observed_series(series, spec);
  if (options.n_particles < 1) {
    throw Error(Errc::invalid_argument, "need at least one particle");
  }
  if (!(std::isfinite(t0) && series.times.front() > t0)) {
    throw Error(Errc::invalid_argument,
                "observations must start strictly after the initial time");
  }

  const ObservationModel eff =
      params.p_obs ? with_p_obs(model, *params.p_obs) : model;
  validate_observation_model(eff, spec);
  if (resolve_observed(eff, spec) != series.compartments) {
    throw Error(Errc::invalid_argument,
                "observation channel and observed series disagree on "
                "which compartments are measured");
  }

  const int n = options.n_particles;
  const auto n_steps = series.times.size();
  const auto rates = params.rate_table();
  const std::span<const int> comps(series.compartments);

  ParticleSystem out;
  out.n_particles = n;
  out.t0 = t0;
  out.init = init;
  out.times = series.times;
  out.step_log_likelihood.reserve(n_steps);

  std::vector<StateVector> cur(static_cast<std::size_t>(n), init);
  std::vector<StateVector> prop(static_cast<std::size_t>(n));
  std::vector<double> logw(static_cast<std::size_t>(n));

  if (options.store_history) {
    out.particles.reserve(n_steps + 1);
    out.particles.push_back(cur);
    out.resample.reserve(n_steps + 1);
    out.resample.emplace_back();  // row 0 aligns with the initial states
  }

  double t_prev = t0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t_k = series.times[k];
    const std::span<const double> row(series.values[k]);
    parallel_for(n, options.n_threads, [&](int i) {
      auto engine = stream
                        .child("prop", static_cast<std::uint64_t>(k),
                               static_cast<std::uint64_t>(i))
                        .engine();
      prop[i] = gillespie_propagate_raw(spec, rates, cur[i], t_prev, t_k,
                                        engine);
      logw[i] = log_obs_density(eff, comps, prop[i], row);
    });

    if (options.store_history) out.particles.push_back(prop);

    const double lse = log_sum_exp(logw);
    if (!std::isfinite(lse)) {
      out.failed = true;
      out.failed_step = static_cast<int>(k);
      out.log_likelihood = kNegInf;
      return out;
    }
    const double increment = lse - std::log(static_cast<double>(n));
    out.step_log_likelihood.push_back(increment);
    out.log_likelihood += increment;

    auto resample_engine =
        stream.child("resample", static_cast<std::uint64_t>(k)).engine();
    const auto idx = draw_resample_indices(logw, resample_engine);
    for (int i = 0; i < n; ++i) cur[i] = prop[idx[i]];
    if (options.store_history) out.resample.push_back(idx);

    t_prev = t_k;
  }
  return out;
}

Trajectory sample_path(const ParticleSystem &system, Xoshiro256pp &engine) {
  const auto n_steps = system.times.size();
  if (system.failed) {
    throw Error(Errc::invalid_argument,
                "cannot sample a path from a failed filter pass");
  }
  if (system.particles.size() != n_steps + 1 ||
      system.resample.size() != n_steps + 1) {
    throw Error(Errc::invalid_argument,
                "path sampling needs a filter pass run with store_history");
  }

  Trajectory path;
  path.times.resize(n_steps + 1);
  path.states.resize(n_steps + 1);
  path.times[0] = system.t0;
  path.states[0] = system.init;
  for (std::size_t k = 0; k < n_steps; ++k) {
    path.times[k + 1] = system.times[k];
  }
  if (n_steps == 0) return path;

  const auto u = engine.uniform_index(
      static_cast<std::uint64_t>(system.n_particles));
  int j = system.resample[n_steps][u];
  path.states[n_steps] = system.particles[n_steps][j];
  for (std::size_t r = n_steps; r >= 2; --r) {
    j = system.resample[r - 1][j];
    path.states[r - 1] = system.particles[r - 1][j];
  }
  return path;
}

}  // namespace epinfer
