// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_PMMH_HPP
#define EPINFER_PMMH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "epinfer/metropolis.hpp"
#include "epinfer/observation.hpp"
#include "epinfer/particle_filter.hpp"

namespace epinfer {

struct Chain {
  Eigen::MatrixXd samples;  // (n_steps + 1) x d, row 0 is the initial point
  std::vector<double> log_target;      // prior plus evidence, per row
  std::vector<double> log_likelihood;  // carried evidence estimate, per row
  std::int64_t accepted = 0;
  std::int64_t bound_rejects = 0;    // proposals outside prior or domain
  std::int64_t filter_failures = 0;  // evidence estimate collapsed to -inf

  std::int64_t n_steps() const noexcept { return samples.rows() - 1; }
  double acceptance_rate() const noexcept {
    return n_steps() > 0
               ? static_cast<double>(accepted) / static_cast<double>(n_steps())
               : 0.0;
  }
};

struct PmmhOptions {
  int n_steps = 1000;
  FilterOptions filter;
  Proposal proposal;
};

// Particle marginal Metropolis-Hastings targeting the posterior of theta
// given the observed series, with the particle filter's evidence estimate
// standing in for the intractable likelihood.
//
// Per step i (1-based): theta' = propose(...) from stream.child("propose", i);
// a proposal equal to the current point is accepted without rerunning the
// filter (the carried estimate is reused, acceptance probability one); a
// proposal outside the prior support or likelihood domain is rejected before
// any filtering; otherwise the filter runs on stream.child("filter", i), a
// collapsed estimate rejects, and the usual acceptance test draws its
// uniform from stream.child("accept", i). The carried evidence estimate is
// never recomputed at the current point.
//
// Throws Errc::numeric if the filter fails at theta0: the chain would anchor
// on an impossible starting point.
Chain pmmh_run(const ModelSpec &spec, const ParameterSpace &space,
               const Prior &prior, const ObservationModel &model,
               const ObservedSeries &series, const StateVector &init,
               double t0, const Eigen::VectorXd &theta0,
               const PmmhOptions &options, const RngStream &stream);

struct PilotOptions {
  int probe_steps = 1000;  // chain length per probe run
  int warmup = 100;        // probe prefix dropped when estimating covariance
  double target_low = 0.10;
  double target_high = 0.25;
  int max_adjustments = 20;
  FilterOptions filter;
};

struct PilotResult {
  double h = 0.0;
  Eigen::MatrixXd sigma;
  Eigen::VectorXd theta;  // final state of the confirming probe
  int adjustments = 0;
  std::vector<std::pair<double, double>> trace;  // (h, acceptance) per probe
};

// Two stage proposal tuning. Stage one probes with identity covariance,
// doubling or halving h until the acceptance band [target_low, target_high]
// is bracketed and then bisecting geometrically. Stage two estimates the
// proposal covariance from the accepted stage one probe (post warmup),
// restarts h at h * d / trace(sigma) to preserve the typical step size, and
// repeats the search on the new covariance. Every probe after the first
// counts against max_adjustments; exceeding the budget throws
// Errc::tuning_failed with the (h, acceptance) trace in the message.
PilotResult pilot_tune(const ModelSpec &spec, const ParameterSpace &space,
                       const Prior &prior, const ObservationModel &model,
                       const ObservedSeries &series, const StateVector &init,
                       double t0, const Eigen::VectorXd &theta0,
                       const PilotOptions &options, const RngStream &stream);

}  // namespace epinfer

#endif  // EPINFER_PMMH_HPP
