// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/abc.hpp"

#include <cmath>
#include <sstream>

#include "epinfer/errors.hpp"
#include "epinfer/gillespie.hpp"

namespace epinfer {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

int series_column(const ObservedSeries &series, int compartment) {
  for (std::size_t m = 0; m < series.compartments.size(); ++m) {
    if (series.compartments[m] == compartment) return static_cast<int>(m);
  }
  return -1;
}

}  // namespace

double summary_distance(const ModelSpec &spec, const ObservedSeries &series,
                        const Trajectory &sim) {
  validate_observed_series(series, spec);
  const int col_i = series_column(series, spec.infected_index);
  const int col_r = series_column(series, spec.removed_index);
  require(col_i >= 0 && col_r >= 0,
          "summary distance needs the infected and removed compartments in "
          "the observed series");
  require(sim.times.size() == series.times.size(),
          "simulated trajectory must be sampled at the observation times");

  double total = 0.0;
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const auto &x = sim.states[k];
    total += std::abs(static_cast<double>(x[spec.infected_index]) -
                      series.values[k][static_cast<std::size_t>(col_i)]);
    total += std::abs(static_cast<double>(x[spec.removed_index]) -
                      series.values[k][static_cast<std::size_t>(col_r)]);
  }
  return total / (2.0 * static_cast<double>(series.times.size()));
}

AbcResult abc_rejection(const ModelSpec &spec, const ParameterSpace &space,
                        const Prior &prior, const ObservedSeries &series,
                        const StateVector &init, double t0,
                        const AbcOptions &options, const RngStream &stream) {
  validate_parameter_space(space);
  validate_state(spec, init);
  validate_observed_series(series, spec);
  require(prior.dim() == space.dim(),
          "prior dimension must match the parameter space");
  require(options.n_accept >= 1, "need at least one accepted draw");
  require(options.max_attempts >= options.n_accept,
          "attempt budget below the requested number of draws");
  require(std::isfinite(options.epsilon) ? options.epsilon >= 0.0 : options.epsilon > 0.0,
          "epsilon must be nonnegative");
  require(options.min_rate >= 0.0, "min_rate must be nonnegative");

  const int d = space.dim();
  AbcResult result;
  result.samples.resize(options.n_accept, d);
  result.distances.reserve(static_cast<std::size_t>(options.n_accept));
  result.attempt.reserve(static_cast<std::size_t>(options.n_accept));

  int accepted = 0;
  for (std::int64_t j = 0; j < options.max_attempts && accepted < options.n_accept;
       ++j) {
    auto theta_engine =
        stream.child("theta", static_cast<std::uint64_t>(j)).engine();
    const Eigen::VectorXd theta = prior.sample(theta_engine);
    if (!space.in_domain(theta)) continue;

    auto sim_engine =
        stream.child("sim", static_cast<std::uint64_t>(j)).engine();
    const Trajectory sim = gillespie_run_grid(
        spec, space.to_params(theta), init, t0, series.times, sim_engine);
    const double dist = summary_distance(spec, series, sim);
    if (dist <= options.epsilon) {
      result.samples.row(accepted) = theta;
      result.distances.push_back(dist);
      result.attempt.push_back(j);
      ++accepted;
    }
  }
  result.attempts = accepted < options.n_accept
                        ? options.max_attempts
                        : result.attempt.back() + 1;

  if (accepted < options.n_accept) {
    const double rate = static_cast<double>(accepted) /
                        static_cast<double>(result.attempts);
    std::ostringstream msg;
    msg << "accepted " << accepted << " of " << options.n_accept
        << " requested draws in " << result.attempts
        << " attempts (rate " << rate << ")";
    if (rate < options.min_rate) {
      throw Error(Errc::epsilon_too_small,
                  msg.str() + "; epsilon is too small for this data");
    }
    throw Error(Errc::invalid_argument,
                msg.str() + "; attempt budget exhausted, raise max_attempts "
                            "or epsilon");
  }
  return result;
}

}  // namespace epinfer
