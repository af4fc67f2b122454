// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_IO_PIPELINE_HPP
#define EPINFER_IO_PIPELINE_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epinfer/diagnostics.hpp"
#include "epinfer/io/scenario.hpp"
#include "epinfer/observation.hpp"

namespace epinfer {

// Stage outputs inside the run directory:
//   simulate  -> hidden.csv           latent path on the sample grid
//   observe   -> observed.csv         noisy measurements at t > t0
//   fit       -> chain_<c>.csv        posterior draws, fit.json run record
//   diagnose  -> summary.json         posterior summaries and diagnostics
//                bands.csv            posterior predictive envelope
//
// Every stage derives its randomness from the master seed through fixed
// stream labels: simulate uses child("simulate"), observe child("observe"),
// chain c of a fit child("chain", c) (probing under "pilot", the kept run
// under "main"), the rejection sampler child("abc"), and the predictive
// envelope child("diagnose"). Within a chain the filter at step i uses
// child("filter", i) and particle j of filter step k child("prop", k, j), so
// any (seed, config) pair maps to one result, independent of thread count.

struct ChainFitInfo {
  std::string proposal_mode;
  int steps = 0;
  std::int64_t accepted = 0;
  std::int64_t bound_rejects = 0;
  std::int64_t filter_failures = 0;
  double acceptance = 0.0;
  double h = 0.0;
  int pilot_adjustments = -1;  // -1 when no pilot stage ran
  Eigen::MatrixXd sigma;       // empty for the adaptive proposal
};

struct FitInfo {
  Method method = Method::pmmh;
  std::vector<ChainFitInfo> chains;  // per chain (pmmh)
  std::int64_t attempts = 0;         // rejection sampler totals
  std::int64_t accepted = 0;
  double rate = 0.0;
};

void run_simulate(const ScenarioConfig &config, std::uint64_t seed,
                  const std::filesystem::path &out_dir);

void run_observe(const ScenarioConfig &config, std::uint64_t seed,
                 const std::filesystem::path &out_dir);

FitInfo run_fit(const ScenarioConfig &config, std::uint64_t seed,
                const std::filesystem::path &out_dir,
                std::optional<int> chains_override = std::nullopt,
                int threads = 1);

PosteriorSummary run_diagnose(const ScenarioConfig &config, std::uint64_t seed,
                              const std::filesystem::path &out_dir);

// All four stages in order; with a sweep, once per value in subdirectory
// sweep_label(value), plus an aggregate sweep.json.
void run_reproduce(const ScenarioConfig &config, std::uint64_t seed,
                   const std::filesystem::path &out_dir,
                   std::optional<int> chains_override = std::nullopt,
                   int threads = 1);

// observed.csv reader ("t" column plus one column per compartment name).
ObservedSeries read_observed_series(const std::filesystem::path &path,
                                    const ModelSpec &spec);

}  // namespace epinfer

#endif  // EPINFER_IO_PIPELINE_HPP
