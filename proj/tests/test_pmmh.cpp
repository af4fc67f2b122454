// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "epinfer/errors.hpp"
#include "epinfer/pmmh.hpp"
#include "epinfer/rng.hpp"
#include "support/stats.hpp"

using namespace epinfer;

namespace {

// Frozen dynamics (both rates zero) keep the hidden state constant, so the
// evidence estimate has zero variance and the sampler reduces to exact
// Metropolis-Hastings on the detection probability. With a uniform prior and
// binomial counts the posterior is Beta(s + 1, f + 1), giving closed form
// moments to test against.
struct ConjugateCase {
  ModelSpec spec = sir_spec(10);
  Params truth{0.0, 0.0};
  StateVector init{5, 5, 0, 0};
  ObservationModel model = binomial_observation(0.5);
  ObservedSeries series;
  ParameterSpace space;
  Prior prior = Prior::uniform_box(Eigen::VectorXd::Zero(1),
                                   Eigen::VectorXd::Ones(1));
  double post_a = 0.0, post_b = 0.0;

  ConjugateCase() {
    model.observed = {1};
    series.compartments = {1};
    const std::vector<double> counts{3.0, 2.0, 4.0, 5.0, 1.0, 2.0};
    for (std::size_t k = 0; k < counts.size(); ++k) {
      series.times.push_back(double(k + 1));
      series.values.push_back({counts[k]});
    }
    double s = 0.0;
    for (const double y : counts) s += y;
    post_a = s + 1.0;
    post_b = 5.0 * double(counts.size()) - s + 1.0;

    space.kinds = {ParamKind::p_obs};
    space.base = truth;
  }

  double posterior_mean() const { return post_a / (post_a + post_b); }
  double posterior_var() const {
    const double n = post_a + post_b;
    return post_a * post_b / (n * n * (n + 1.0));
  }
};

Eigen::VectorXd scalar(double x) {
  Eigen::VectorXd v(1);
  v[0] = x;
  return v;
}

std::vector<double> column(const Eigen::MatrixXd &m, int j, int burn) {
  std::vector<double> out;
  for (Eigen::Index i = burn; i < m.rows(); ++i) out.push_back(m(i, j));
  return out;
}

}  // namespace

TEST_CASE("chain recovers the conjugate posterior exactly in distribution") {
  const ConjugateCase cc;
  PmmhOptions opts;
  opts.n_steps = 30000;
  opts.filter.n_particles = 1;  // evidence is deterministic here
  opts.proposal.h = 0.05;

  const auto chain = pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                              cc.init, 0.0, scalar(0.5), opts, RngStream(41));
  CHECK(chain.filter_failures == 0);
  CHECK(chain.acceptance_rate() > 0.2);
  const auto draws = column(chain.samples, 0, 500);
  CHECK(std::abs(test::mean_of(draws) - cc.posterior_mean()) < 0.008);
  CHECK(test::variance_of(draws) ==
        doctest::Approx(cc.posterior_var()).epsilon(0.10));
}

TEST_CASE("adaptive proposals reach the same posterior") {
  const ConjugateCase cc;
  PmmhOptions opts;
  opts.n_steps = 30000;
  opts.filter.n_particles = 1;
  opts.proposal.mode = Proposal::Mode::adaptive;
  opts.proposal.adapt_t0 = 100;

  const auto chain = pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                              cc.init, 0.0, scalar(0.5), opts, RngStream(42));
  const auto draws = column(chain.samples, 0, 1000);
  CHECK(std::abs(test::mean_of(draws) - cc.posterior_mean()) < 0.01);
  CHECK(test::variance_of(draws) ==
        doctest::Approx(cc.posterior_var()).epsilon(0.2));
}

TEST_CASE("chain bookkeeping is internally consistent") {
  const ConjugateCase cc;
  PmmhOptions opts;
  opts.n_steps = 300;
  opts.filter.n_particles = 1;
  opts.proposal.h = 0.5;  // large enough to generate bound rejections

  const auto chain = pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                              cc.init, 0.0, scalar(0.5), opts, RngStream(43));
  REQUIRE(chain.samples.rows() == 301);
  CHECK(chain.n_steps() == 300);
  CHECK(chain.bound_rejects > 0);
  CHECK(chain.accepted > 0);
  CHECK(chain.accepted + chain.bound_rejects + chain.filter_failures <= 300);
  CHECK(chain.acceptance_rate() ==
        doctest::Approx(double(chain.accepted) / 300.0));

  // Every recorded row carries its own prior plus evidence decomposition,
  // and rows only change on accepted steps.
  std::int64_t changes = 0;
  for (Eigen::Index i = 0; i <= 300; ++i) {
    const double p = cc.prior.log_density(chain.samples.row(i).transpose());
    CHECK(chain.log_target[std::size_t(i)] ==
          doctest::Approx(p + chain.log_likelihood[std::size_t(i)])
              .epsilon(1e-12));
    if (i > 0 && chain.samples.row(i) != chain.samples.row(i - 1)) ++changes;
  }
  CHECK(changes == chain.accepted);
}

TEST_CASE("a zero scale proposal accepts every step without moving") {
  const ConjugateCase cc;
  PmmhOptions opts;
  opts.n_steps = 50;
  opts.filter.n_particles = 1;
  opts.proposal.h = 0.0;

  const auto chain = pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                              cc.init, 0.0, scalar(0.4), opts, RngStream(44));
  CHECK(chain.accepted == 50);
  CHECK(chain.bound_rejects == 0);
  CHECK(chain.filter_failures == 0);
  for (Eigen::Index i = 0; i <= 50; ++i) {
    CHECK(chain.samples(i, 0) == 0.4);
    CHECK(chain.log_likelihood[std::size_t(i)] == chain.log_likelihood[0]);
  }
}

TEST_CASE("identical streams replay identical chains") {
  const ConjugateCase cc;
  PmmhOptions opts;
  opts.n_steps = 200;
  opts.filter.n_particles = 4;
  const auto a = pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                          cc.init, 0.0, scalar(0.5), opts, RngStream(45));
  const auto b = pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                          cc.init, 0.0, scalar(0.5), opts, RngStream(45));
  CHECK(a.samples == b.samples);
  CHECK(a.log_target == b.log_target);
  CHECK(a.accepted == b.accepted);
}

TEST_CASE("collapsed evidence at the start refuses to anchor") {
  // Removal only: at gamma = 40 essentially no particle keeps the single
  // infected alive to the first full detection observation.
  const auto spec = sir_spec(3);
  ParameterSpace space;
  space.kinds = {ParamKind::gamma};
  space.base = Params(0.0, 1.0);
  const auto prior = Prior::uniform_box(Eigen::VectorXd::Zero(1),
                                        scalar(50.0));
  auto model = binomial_observation(1.0);
  model.observed = {1};
  ObservedSeries series;
  series.times = {0.5, 1.0};
  series.compartments = {1};
  series.values = {{1.0}, {1.0}};

  PmmhOptions opts;
  opts.n_steps = 10;
  opts.filter.n_particles = 8;
  CHECK_THROWS_AS(pmmh_run(spec, space, prior, model, series,
                           StateVector{2, 1, 0, 0}, 0.0, scalar(40.0), opts,
                           RngStream(46)),
                  Error);
}

TEST_CASE("collapsed evidence at a candidate counts as a filter failure") {
  const auto spec = sir_spec(3);
  ParameterSpace space;
  space.kinds = {ParamKind::gamma};
  space.base = Params(0.0, 1.0);
  const auto prior = Prior::uniform_box(Eigen::VectorXd::Zero(1),
                                        scalar(50.0));
  auto model = binomial_observation(1.0);
  model.observed = {1};
  ObservedSeries series;
  series.times = {0.5, 1.0};
  series.compartments = {1};
  series.values = {{1.0}, {1.0}};

  PmmhOptions opts;
  opts.n_steps = 400;
  opts.filter.n_particles = 8;
  opts.proposal.h = 400.0;  // keep proposing distant rates

  const auto chain = pmmh_run(spec, space, prior, model, series,
                              StateVector{2, 1, 0, 0}, 0.0, scalar(0.1), opts,
                              RngStream(47));
  CHECK(chain.filter_failures > 0);
  CHECK(chain.bound_rejects > 0);
  for (Eigen::Index i = 0; i <= 400; ++i) {
    CHECK(chain.samples(i, 0) > 0.0);
    CHECK(std::isfinite(chain.log_likelihood[std::size_t(i)]));
  }
}

TEST_CASE("argument validation") {
  const ConjugateCase cc;
  PmmhOptions opts;
  opts.filter.n_particles = 1;

  SUBCASE("theta0 must be inside the prior") {
    CHECK_THROWS_AS(pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                             cc.init, 0.0, scalar(1.5), opts, RngStream(1)),
                    Error);
  }
  SUBCASE("prior dimension must match") {
    const auto wide = Prior::uniform_box(Eigen::VectorXd::Zero(2),
                                         Eigen::VectorXd::Ones(2));
    CHECK_THROWS_AS(pmmh_run(cc.spec, cc.space, wide, cc.model, cc.series,
                             cc.init, 0.0, scalar(0.5), opts, RngStream(1)),
                    Error);
  }
  SUBCASE("adaptive warm length must allow a covariance") {
    opts.proposal.mode = Proposal::Mode::adaptive;
    opts.proposal.adapt_t0 = 1;
    CHECK_THROWS_AS(pmmh_run(cc.spec, cc.space, cc.prior, cc.model, cc.series,
                             cc.init, 0.0, scalar(0.5), opts, RngStream(1)),
                    Error);
  }
}

TEST_CASE("pilot tuning lands inside the acceptance band") {
  // A hidden state pinned at zero makes every observation certain, so the
  // likelihood is flat and acceptance depends on h alone through the prior
  // box; the band is always reachable.
  const auto spec = sir_spec(10);
  ParameterSpace space;
  space.kinds = {ParamKind::p_obs};
  space.base = Params(2.0, 1.0);
  const auto prior = Prior::uniform_box(Eigen::VectorXd::Zero(1),
                                        Eigen::VectorXd::Ones(1));
  auto model = binomial_observation(0.5);
  model.observed = {1};
  ObservedSeries series;
  series.times = {1.0, 2.0};
  series.compartments = {1};
  series.values = {{0.0}, {0.0}};
  const StateVector init{10, 0, 0, 0};

  PilotOptions opts;
  opts.probe_steps = 400;
  opts.warmup = 100;
  opts.filter.n_particles = 1;

  const auto tuned = pilot_tune(spec, space, prior, model, series, init, 0.0,
                                scalar(0.5), opts, RngStream(48));
  CHECK(tuned.h > 0.0);
  CHECK(tuned.sigma.rows() == 1);
  CHECK(tuned.sigma(0, 0) > 0.0);
  CHECK(tuned.theta[0] > 0.0);
  CHECK(tuned.theta[0] <= 1.0);
  CHECK(tuned.adjustments >= 1);  // the confirming probe always counts
  CHECK(tuned.adjustments <= opts.max_adjustments + 1);
  REQUIRE(!tuned.trace.empty());
  const auto [h_last, acc_last] = tuned.trace.back();
  CHECK(h_last == tuned.h);
  CHECK(acc_last >= opts.target_low);
  CHECK(acc_last <= opts.target_high);
}

TEST_CASE("an exhausted adjustment budget reports the probe trace") {
  const auto spec = sir_spec(10);
  ParameterSpace space;
  space.kinds = {ParamKind::p_obs};
  space.base = Params(2.0, 1.0);
  const auto prior = Prior::uniform_box(Eigen::VectorXd::Zero(1),
                                        Eigen::VectorXd::Ones(1));
  auto model = binomial_observation(0.5);
  model.observed = {1};
  ObservedSeries series;
  series.times = {1.0};
  series.compartments = {1};
  series.values = {{0.0}};
  const StateVector init{10, 0, 0, 0};

  PilotOptions opts;
  opts.probe_steps = 100;
  opts.warmup = 10;
  opts.target_low = 0.85;  // unreachable from the default h
  opts.target_high = 0.90;
  opts.max_adjustments = 0;
  opts.filter.n_particles = 1;

  try {
    pilot_tune(spec, space, prior, model, series, init, 0.0, scalar(0.5), opts,
               RngStream(49));
    FAIL("tuning should have exhausted its budget");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::tuning_failed);
    CHECK(std::string(err.what()).find("h=") != std::string::npos);
    CHECK(std::string(err.what()).find("acceptance=") != std::string::npos);
  }
}
