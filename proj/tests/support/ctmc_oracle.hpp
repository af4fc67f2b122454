// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_TESTS_SUPPORT_CTMC_ORACLE_HPP
#define EPINFER_TESTS_SUPPORT_CTMC_ORACLE_HPP

#include <Eigen/Dense>
#include <vector>

#include "epinfer/model.hpp"
#include "epinfer/observation.hpp"

namespace epinfer::test {

// Exact finite-state view of a small jump process. The state space is the
// full simplex of compartment counts summing to the population, so it grows
// combinatorially; keep populations tiny (a population of 3 gives 10 SIR
// states). Used as an independent oracle against sampled quantities.
struct CtmcOracle {
  ModelSpec spec;
  Params params{1.0, 1.0};
  std::vector<StateVector> states;
  Eigen::MatrixXd generator;

  int index_of(const StateVector &x) const;

  // exp(generator * dt), the exact transition kernel over a gap.
  Eigen::MatrixXd transition(double dt) const;
};

CtmcOracle make_ctmc_oracle(const ModelSpec &spec, const Params &params);

// Distribution over states at time t starting from a point mass on init.
Eigen::VectorXd ctmc_endpoint(const CtmcOracle &ctmc, const StateVector &init,
                              double t0, double t);

// Exact log evidence of the hidden Markov model defined by the jump process,
// the emission channel and the observation rows: forward recursion with
// per-step normalization.
double ctmc_log_likelihood(const CtmcOracle &ctmc,
                           const ObservationModel &model,
                           const ObservedSeries &series,
                           const StateVector &init, double t0);

// Smoothing marginals P(state at observation time k | all observations);
// row k corresponds to series.times[k].
Eigen::MatrixXd ctmc_smoothing(const CtmcOracle &ctmc,
                               const ObservationModel &model,
                               const ObservedSeries &series,
                               const StateVector &init, double t0);

}  // namespace epinfer::test

#endif  // EPINFER_TESTS_SUPPORT_CTMC_ORACLE_HPP
