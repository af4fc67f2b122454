// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_OBSERVATION_HPP
#define EPINFER_OBSERVATION_HPP

#include <span>
#include <vector>

#include "epinfer/model.hpp"
#include "epinfer/rng.hpp"

namespace epinfer {

enum class ObsKind { gaussian, binomial };

// Emission channel applied independently to each observed compartment at
// each observation time.
//
//   gaussian:  y ~ Normal(x, max(n_ratio * x, variance_floor))
//   binomial:  y ~ Binomial(x, p_obs)
//
// The variance floor keeps the gaussian density proper when a compartment
// empties. An empty `observed` list means every compartment of the model is
// observed, in model order.
struct ObservationModel {
  ObsKind kind = ObsKind::gaussian;
  double n_ratio = 0.01;
  double variance_floor = 0.25;
  double p_obs = 1.0;
  std::vector<int> observed;
};

ObservationModel gaussian_observation(double n_ratio);
ObservationModel binomial_observation(double p_obs);

// Copy with the detection probability replaced; used when p_obs is a fitted
// parameter rather than a fixed property of the channel.
ObservationModel with_p_obs(ObservationModel model, double p_obs);

// Throws Errc::invalid_argument on out of range fields or observed indices
// outside the model.
void validate_observation_model(const ObservationModel &model,
                                const ModelSpec &spec);

// Observed compartment indices with the empty-means-all default applied.
std::vector<int> resolve_observed(const ObservationModel &model,
                                  const ModelSpec &spec);

// Noisy measurements of a hidden path at each of its time points. Binomial
// values are integers stored as doubles; gaussian values are real.
struct ObservedSeries {
  std::vector<double> times;
  std::vector<int> compartments;
  std::vector<std::vector<double>> values;  // values[k][m], m indexing compartments
};

void validate_observed_series(const ObservedSeries &series,
                              const ModelSpec &spec);

// Draws one observation row per trajectory point. The hidden trajectory must
// already be restricted to the times meant to be observed.
ObservedSeries simulate_observation(const ModelSpec &spec,
                                    const ObservationModel &model,
                                    const Trajectory &hidden,
                                    Xoshiro256pp &engine);

// Real-valued hidden states (deterministic paths): the gaussian channel uses
// the state as is; the binomial channel rounds it half to even to obtain the
// trial count.
ObservedSeries simulate_observation(const ModelSpec &spec,
                                    const ObservationModel &model,
                                    const RealTrajectory &hidden,
                                    Xoshiro256pp &engine);

// Log density of one observation row given the hidden state, summed over the
// observed compartments `comps` (as produced by resolve_observed). Returns
// -infinity where the density is zero, in particular for binomial
// observations exceeding the hidden count. Never throws; the weight of an
// impossible particle must be representable.
double log_obs_density(const ObservationModel &model,
                       std::span<const int> comps, const StateVector &x,
                       std::span<const double> y) noexcept;

// Natural log of n! with cached small-n values; safe for concurrent callers.
double log_factorial(std::int64_t n) noexcept;

}  // namespace epinfer

#endif  // EPINFER_OBSERVATION_HPP
