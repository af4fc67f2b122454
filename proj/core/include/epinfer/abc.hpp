// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_ABC_HPP
#define EPINFER_ABC_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "epinfer/metropolis.hpp"
#include "epinfer/observation.hpp"

namespace epinfer {

struct AbcOptions {
  int n_accept = 1000;
  double epsilon = 150.0;
  std::int64_t max_attempts = 10000000;
  double min_rate = 1e-6;  // viability floor when the budget runs out
};

struct AbcResult {
  Eigen::MatrixXd samples;            // n_accept x d, in attempt order
  std::vector<double> distances;      // summary distance per accepted draw
  std::vector<std::int64_t> attempt;  // attempt index per accepted draw
  std::int64_t attempts = 0;
};

// Summary distance between a simulated trajectory and the observed series:
// mean absolute difference of the infected and removed counts across the
// observation times. The series must include both compartments; extra
// observed compartments are ignored.
double summary_distance(const ModelSpec &spec, const ObservedSeries &series,
                        const Trajectory &sim);

// Rejection sampler: attempt j draws theta from the prior with
// stream.child("theta", j), simulates the jump process on the observation
// grid with stream.child("sim", j), and accepts when the summary distance is
// at most epsilon. Because each attempt has its own substreams, shrinking
// epsilon can only thin the accepted set, never reshuffle it.
//
// Stops after n_accept acceptances. If max_attempts runs out first the call
// throws: Errc::epsilon_too_small when the observed acceptance rate is below
// min_rate, Errc::invalid_argument (budget exhausted) otherwise.
AbcResult abc_rejection(const ModelSpec &spec, const ParameterSpace &space,
                        const Prior &prior, const ObservedSeries &series,
                        const StateVector &init, double t0,
                        const AbcOptions &options, const RngStream &stream);

}  // namespace epinfer

#endif  // EPINFER_ABC_HPP
