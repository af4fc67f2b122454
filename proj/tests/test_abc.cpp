// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "epinfer/abc.hpp"
#include "epinfer/errors.hpp"
#include "epinfer/gillespie.hpp"
#include "epinfer/rng.hpp"
#include "support/stats.hpp"

using namespace epinfer;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Small outbreak with exact counts of I and R on a three point grid.
struct AbcCase {
  ModelSpec spec = sir_spec(100);
  Params truth{2.0, 1.0};
  StateVector init{90, 10, 0, 0};
  ObservedSeries series;
  ParameterSpace space;
  Prior prior = Prior::uniform_box(Eigen::VectorXd::Zero(2),
                                   Eigen::VectorXd::Constant(2, 5.0));

  AbcCase() {
    const std::vector<double> grid{1.0, 2.0, 3.0};
    auto engine = RngStream(71).child("truth").engine();
    const auto traj = gillespie_run_grid(spec, truth, init, 0.0, grid, engine);
    series.times = grid;
    series.compartments = {1, 2};
    for (const auto &x : traj.states)
      series.values.push_back({double(x[1]), double(x[2])});
    space.kinds = {ParamKind::beta, ParamKind::gamma};
  }
};

}  // namespace

TEST_CASE("summary distance is the mean absolute count discrepancy") {
  const auto spec = sir_spec(100);
  ObservedSeries series;
  series.times = {1.0, 2.0};
  series.compartments = {1, 2};
  series.values = {{10.0, 5.0}, {20.0, 12.0}};

  Trajectory sim;
  sim.times = {1.0, 2.0};
  sim.states = {StateVector{83, 13, 4, 0}, StateVector{62, 24, 14, 0}};
  // |13-10| + |4-5| + |24-20| + |14-12| over 2 compartments x 2 times.
  CHECK(summary_distance(spec, series, sim) ==
        doctest::Approx((3.0 + 1.0 + 4.0 + 2.0) / 4.0).epsilon(1e-15));
}

TEST_CASE("summary distance validates its inputs") {
  const auto spec = sir_spec(100);
  ObservedSeries series;
  series.times = {1.0};
  series.compartments = {1, 2};
  series.values = {{10.0, 5.0}};

  Trajectory sim;
  sim.times = {1.0, 2.0};
  sim.states = {StateVector{83, 13, 4, 0}, StateVector{62, 24, 14, 0}};
  CHECK_THROWS_AS(summary_distance(spec, series, sim), Error);

  ObservedSeries missing;
  missing.times = {1.0, 2.0};
  missing.compartments = {1};
  missing.values = {{10.0}, {20.0}};
  Trajectory ok = sim;
  CHECK_THROWS_AS(summary_distance(spec, missing, ok), Error);
}

TEST_CASE("accepted draws satisfy the threshold and live in the prior") {
  const AbcCase ac;
  AbcOptions opts;
  opts.n_accept = 50;
  opts.epsilon = 30.0;
  const auto result = abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                    ac.init, 0.0, opts, RngStream(72));
  REQUIRE(result.samples.rows() == 50);
  REQUIRE(result.distances.size() == 50);
  REQUIRE(result.attempt.size() == 50);
  CHECK(result.attempts == result.attempt.back() + 1);
  for (int i = 0; i < 50; ++i) {
    CHECK(result.distances[std::size_t(i)] <= 30.0);
    CHECK(ac.prior.contains(result.samples.row(i).transpose()));
    if (i > 0) CHECK(result.attempt[std::size_t(i)] >
                     result.attempt[std::size_t(i) - 1]);
  }
}

TEST_CASE("shrinking epsilon thins the accepted set without reshuffling") {
  const AbcCase ac;
  AbcOptions all;
  all.n_accept = 300;
  all.epsilon = kInf;
  const RngStream stream(73);
  const auto everything = abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                        ac.init, 0.0, all, stream);
  REQUIRE(everything.attempts == 300);

  // Pick a threshold that keeps roughly a third of the first 300 attempts.
  std::vector<double> sorted = everything.distances;
  std::sort(sorted.begin(), sorted.end());
  const double eps = sorted[99];
  std::vector<std::int64_t> expected_attempts;
  for (std::size_t j = 0; j < everything.distances.size(); ++j)
    if (everything.distances[j] <= eps)
      expected_attempts.push_back(std::int64_t(j));

  AbcOptions tight;
  tight.n_accept = int(expected_attempts.size());
  tight.epsilon = eps;
  const auto subset = abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                    ac.init, 0.0, tight, stream);
  REQUIRE(subset.attempt == expected_attempts);
  for (std::size_t i = 0; i < expected_attempts.size(); ++i) {
    const auto j = Eigen::Index(expected_attempts[i]);
    CHECK(subset.samples.row(Eigen::Index(i)) == everything.samples.row(j));
    CHECK(subset.distances[i] == everything.distances[std::size_t(j)]);
  }
}

TEST_CASE("an infinite threshold returns the prior") {
  const AbcCase ac;
  AbcOptions opts;
  opts.n_accept = 500;
  opts.epsilon = kInf;
  const auto result = abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                    ac.init, 0.0, opts, RngStream(74));
  std::vector<double> beta, gamma;
  for (Eigen::Index i = 0; i < 500; ++i) {
    beta.push_back(result.samples(i, 0));
    gamma.push_back(result.samples(i, 1));
  }
  const double crit = test::ks_critical(500, 0.01);
  CHECK(test::ks_uniform_statistic(beta, 0.0, 5.0) < crit);
  CHECK(test::ks_uniform_statistic(gamma, 0.0, 5.0) < crit);
}

TEST_CASE("a hopeless threshold reports epsilon_too_small") {
  const AbcCase ac;
  AbcOptions opts;
  opts.n_accept = 10;
  opts.epsilon = 0.0;  // continuous summaries essentially never hit zero
  opts.max_attempts = 3000;
  try {
    abc_rejection(ac.spec, ac.space, ac.prior, ac.series, ac.init, 0.0, opts,
                  RngStream(75));
    FAIL("the sampler should have given up");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::epsilon_too_small);
  }
}

TEST_CASE("a viable rate that merely runs out of budget asks for more") {
  const AbcCase ac;
  AbcOptions opts;
  opts.n_accept = 1000;
  opts.epsilon = 30.0;  // plenty of acceptances per attempt
  opts.max_attempts = 60;
  try {
    abc_rejection(ac.spec, ac.space, ac.prior, ac.series, ac.init, 0.0, opts,
                  RngStream(76));
    FAIL("the budget cannot cover a thousand acceptances");
  } catch (const Error &err) {
    CHECK(err.code() == Errc::invalid_argument);
  }
}

TEST_CASE("option validation") {
  const AbcCase ac;
  AbcOptions opts;
  opts.n_accept = 0;
  CHECK_THROWS_AS(abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                ac.init, 0.0, opts, RngStream(1)),
                  Error);
  opts.n_accept = 10;
  opts.epsilon = -1.0;
  CHECK_THROWS_AS(abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                ac.init, 0.0, opts, RngStream(1)),
                  Error);
  opts.epsilon = 1.0;
  opts.max_attempts = 5;  // smaller than n_accept can ever satisfy
  CHECK_THROWS_AS(abc_rejection(ac.spec, ac.space, ac.prior, ac.series,
                                ac.init, 0.0, opts, RngStream(1)),
                  Error);
}
