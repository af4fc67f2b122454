// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/pmmh.hpp"

#include <cmath>
#include <sstream>

#include "epinfer/errors.hpp"

namespace epinfer {

namespace {

void require(bool ok, Errc code, const std::string &what) {
  if (!ok) throw Error(code, what);
}

}  // namespace

Chain pmmh_run(const ModelSpec &spec, const ParameterSpace &space,
               const Prior &prior, const ObservationModel &model,
               const ObservedSeries &series, const StateVector &init,
               double t0, const Eigen::VectorXd &theta0,
               const PmmhOptions &options, const RngStream &stream) {
  validate_parameter_space(space);
  const int d = space.dim();
  require(prior.dim() == d, Errc::invalid_argument,
          "prior dimension must match the parameter space");
  require(options.n_steps >= 0, Errc::invalid_argument,
          "step count must be nonnegative");
  require(prior.contains(theta0) && space.in_domain(theta0),
          Errc::invalid_argument,
          "initial point must lie in the prior support and the domain");

  const auto &prop = options.proposal;
  const double h = prop.h ? *prop.h : default_proposal_scale(d);
  require(std::isfinite(h) && h >= 0.0, Errc::invalid_argument,
          "proposal scale must be finite and nonnegative");
  Eigen::MatrixXd fixed_sigma = prop.sigma;
  if (fixed_sigma.size() == 0) {
    fixed_sigma = Eigen::MatrixXd::Identity(d, d);
  }
  require(fixed_sigma.rows() == d && fixed_sigma.cols() == d,
          Errc::invalid_argument,
          "proposal covariance shape must match the parameter space");
  if (prop.mode == Proposal::Mode::adaptive) {
    require(prop.adapt_t0 >= 2, Errc::invalid_argument,
            "adaptation needs at least two warm steps");
    require(prop.adapt_epsilon > 0.0, Errc::invalid_argument,
            "adaptation ridge must be positive");
  }

  Chain chain;
  chain.samples.resize(options.n_steps + 1, d);
  chain.log_target.resize(static_cast<std::size_t>(options.n_steps) + 1);
  chain.log_likelihood.resize(static_cast<std::size_t>(options.n_steps) + 1);

  const auto run_filter = [&](const Eigen::VectorXd &theta,
                              std::uint64_t step) {
    return particle_filter(spec, space.to_params(theta), model, series, init,
                           t0, options.filter, stream.child("filter", step));
  };

  Eigen::VectorXd theta = theta0;
  const ParticleSystem anchor = run_filter(theta, 0);
  require(!anchor.failed, Errc::numeric,
          "evidence estimate collapsed at the initial parameters; the chain "
          "cannot anchor there");
  double log_like = anchor.log_likelihood;
  double log_target = prior.log_density(theta) + log_like;

  chain.samples.row(0) = theta;
  chain.log_target[0] = log_target;
  chain.log_likelihood[0] = log_like;

  CovarianceAccumulator history(d);
  history.push(theta);

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  for (int i = 1; i <= options.n_steps; ++i) {
    Eigen::MatrixXd sigma;
    if (prop.mode == Proposal::Mode::adaptive) {
      sigma = i <= prop.adapt_t0
                  ? identity
                  : Eigen::MatrixXd(history.covariance() +
                                    prop.adapt_epsilon * identity);
    } else {
      sigma = fixed_sigma;
    }

    auto prop_engine =
        stream.child("propose", static_cast<std::uint64_t>(i)).engine();
    const Eigen::VectorXd cand = propose(theta, h, sigma, prop_engine);

    if (cand == theta) {
      // Degenerate proposal (h = 0): the acceptance ratio is exactly one and
      // the carried evidence estimate stays valid, so no filter run.
      ++chain.accepted;
    } else if (!prior.contains(cand) || !space.in_domain(cand)) {
      ++chain.bound_rejects;
    } else {
      const ParticleSystem sys =
          run_filter(cand, static_cast<std::uint64_t>(i));
      if (sys.failed) {
        ++chain.filter_failures;
      } else {
        const double cand_target =
            prior.log_density(cand) + sys.log_likelihood;
        const double a = mh_acceptance(cand_target, log_target);
        const double u = stream.child("accept", static_cast<std::uint64_t>(i))
                             .engine()
                             .uniform();
        if (u < a) {
          theta = cand;
          log_like = sys.log_likelihood;
          log_target = cand_target;
          ++chain.accepted;
        }
      }
    }

    chain.samples.row(i) = theta;
    chain.log_target[static_cast<std::size_t>(i)] = log_target;
    chain.log_likelihood[static_cast<std::size_t>(i)] = log_like;
    history.push(theta);
  }
  return chain;
}

namespace {

[[noreturn]] void tuning_failure(
    const std::vector<std::pair<double, double>> &trace) {
  std::ostringstream msg;
  msg << "pilot tuning exhausted its adjustment budget; probes:";
  for (const auto &[h, acc] : trace) {
    msg << " (h=" << h << ", acceptance=" << acc << ")";
  }
  throw Error(Errc::tuning_failed, msg.str());
}

}  // namespace

PilotResult pilot_tune(const ModelSpec &spec, const ParameterSpace &space,
                       const Prior &prior, const ObservationModel &model,
                       const ObservedSeries &series, const StateVector &init,
                       double t0, const Eigen::VectorXd &theta0,
                       const PilotOptions &options, const RngStream &stream) {
  validate_parameter_space(space);
  const int d = space.dim();
  require(options.probe_steps >= 2, Errc::invalid_argument,
          "probe runs need at least two steps");
  require(options.warmup >= 0 && options.warmup < options.probe_steps,
          Errc::invalid_argument, "warmup must be shorter than a probe");
  require(0.0 < options.target_low && options.target_low < options.target_high &&
              options.target_high < 1.0,
          Errc::invalid_argument, "acceptance band must satisfy 0 < low < high < 1");
  require(options.max_adjustments >= 0, Errc::invalid_argument,
          "adjustment budget must be nonnegative");

  PilotResult result;
  int probes = 0;

  const auto run_probe = [&](double h, const Eigen::MatrixXd &sigma,
                             const Eigen::VectorXd &start) {
    PmmhOptions opt;
    opt.n_steps = options.probe_steps;
    opt.filter = options.filter;
    opt.proposal.mode = Proposal::Mode::fixed;
    opt.proposal.h = h;
    opt.proposal.sigma = sigma;
    Chain chain = pmmh_run(spec, space, prior, model, series, init, t0, start,
                           opt, stream.child("pilot", probes));
    ++probes;
    result.trace.emplace_back(h, chain.acceptance_rate());
    return chain;
  };

  // Walks h until the probe acceptance lands in the band: doubling or
  // halving while only one side of the band has been seen, geometric
  // bisection once both sides bracket it.
  const auto search = [&](double h0, const Eigen::MatrixXd &sigma,
                          Eigen::VectorXd start) {
    double h = h0;
    double h_small = 0.0;  // largest h seen with acceptance above the band
    double h_big = 0.0;    // smallest h seen with acceptance below the band
    Chain chain = run_probe(h, sigma, start);
    for (;;) {
      const double acc = chain.acceptance_rate();
      if (acc >= options.target_low && acc <= options.target_high) {
        return std::pair<double, Chain>(h, std::move(chain));
      }
      if (acc > options.target_high) {
        h_small = h;
      } else {
        h_big = h;
      }
      if (h_small > 0.0 && h_big > 0.0) {
        h = std::sqrt(h_small * h_big);
      } else {
        h = acc > options.target_high ? 2.0 * h : 0.5 * h;
      }
      if (probes > options.max_adjustments || !(h > 1e-300) || h > 1e300) {
        tuning_failure(result.trace);
      }
      start = chain.samples.row(chain.samples.rows() - 1);
      chain = run_probe(h, sigma, start);
    }
  };

  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(d, d);
  auto [h1, stage1] = search(default_proposal_scale(d), identity, theta0);

  // Stage two: proposal covariance from the accepted probe, h rescaled so
  // the typical squared step size is preserved when identity is swapped for
  // the sample covariance.
  const auto kept = stage1.samples.bottomRows(stage1.samples.rows() -
                                              options.warmup);
  const Eigen::RowVectorXd mean = kept.colwise().mean();
  const Eigen::MatrixXd centered = kept.rowwise() - mean;
  Eigen::MatrixXd sigma =
      centered.transpose() * centered / static_cast<double>(kept.rows() - 1);
  sigma += 1e-10 * identity;  // keeps a degenerate probe factorisable

  double h2 = h1 * static_cast<double>(d) / sigma.trace();
  if (!(std::isfinite(h2) && h2 > 0.0)) h2 = h1;
  Eigen::VectorXd start = stage1.samples.row(stage1.samples.rows() - 1);
  auto [h_final, confirm] = search(h2, sigma, start);

  result.h = h_final;
  result.sigma = std::move(sigma);
  result.theta = confirm.samples.row(confirm.samples.rows() - 1);
  result.adjustments = probes - 1;
  return result;
}

}  // namespace epinfer
