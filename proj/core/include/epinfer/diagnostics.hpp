// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_DIAGNOSTICS_HPP
#define EPINFER_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "epinfer/metropolis.hpp"
#include "epinfer/model.hpp"
#include "epinfer/rng.hpp"

namespace epinfer {

// Rows burn, burn + thin, burn + 2 thin, ... of the sample matrix; the
// result has floor((rows - burn - 1) / thin) + 1 rows. Requires
// 0 <= burn < rows and thin >= 1.
Eigen::MatrixXd burn_thin(const Eigen::MatrixXd &samples, std::int64_t burn,
                          std::int64_t thin);

// Potential scale reduction factor over two or more equal length scalar
// chains (the classic non split form):
//   sqrt(((n - 1) / n * W + B / n) / W)
// with W the mean within chain variance and B the between chain variance.
double gelman_rubin(const std::vector<Eigen::VectorXd> &chains);

// Effective sample size n / tau with the integrated autocorrelation time
// truncated by the initial positive sequence rule: lag pairs
// rho_{2m} + rho_{2m+1} are summed while positive. The estimate is clipped
// into (0, n]; a constant chain reports n.
double effective_sample_size(const Eigen::VectorXd &chain);

// Narrowest interval containing ceil(mass * n) of the samples: every
// contiguous window of that size in the sorted sample is a candidate and the
// shortest one wins (ties go to the leftmost). Requires 0 < mass <= 1.
std::pair<double, double> hpd_interval(std::span<const double> samples,
                                       double mass);

// Mean squared deviation of the samples from a known truth:
// sum_j (truth - s_j)^2 / n. Equals squared bias plus population variance.
double pmse(double truth, std::span<const double> samples);

// Empirical quantile with linear interpolation between order statistics
// (the common "type 7" rule). `sorted` must be ascending and nonempty.
double quantile_sorted(std::span<const double> sorted, double q);

struct TrajectoryBands {
  std::vector<double> times;
  // One row per model compartment, one column per grid time.
  std::vector<std::vector<double>> lower;   // 2.5% quantile
  std::vector<std::vector<double>> median;  // 50% quantile
  std::vector<std::vector<double>> upper;   // 97.5% quantile
};

// Posterior predictive envelope: draw j picks a posterior sample row
// uniformly and re-simulates the jump process on t_grid, both using
// stream.child("bands", j); the pointwise 2.5/50/97.5 percent quantiles of
// the simulated counts form the bands.
TrajectoryBands trajectory_bands(const ModelSpec &spec,
                                 const ParameterSpace &space,
                                 const Eigen::MatrixXd &samples,
                                 const StateVector &init, double t0,
                                 std::span<const double> t_grid, int n_draws,
                                 const RngStream &stream);

struct PosteriorSummary {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<std::pair<double, double>> hpd;
  std::vector<double> ess;   // summed over chains
  std::vector<double> rhat;  // NaN when fewer than two chains
  double hpd_mass = 0.95;
};

// Per parameter summaries over already burned and thinned chains of equal
// length: pooled mean and sd (unbiased), pooled HPD interval, per chain ESS
// summed, and the scale reduction factor across chains.
PosteriorSummary summarize_posterior(const std::vector<Eigen::MatrixXd> &chains,
                                     const std::vector<std::string> &names,
                                     double hpd_mass = 0.95);

}  // namespace epinfer

#endif  // EPINFER_DIAGNOSTICS_HPP
