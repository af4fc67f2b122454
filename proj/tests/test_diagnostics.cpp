// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "epinfer/diagnostics.hpp"
#include "epinfer/errors.hpp"
#include "epinfer/rng.hpp"
#include "support/stats.hpp"

using namespace epinfer;

namespace {

Eigen::MatrixXd iota_matrix(int rows) {
  Eigen::MatrixXd m(rows, 1);
  for (int i = 0; i < rows; ++i) m(i, 0) = double(i);
  return m;
}

Eigen::VectorXd ar1_chain(double rho, int n, std::uint64_t seed) {
  auto engine = RngStream(seed).engine();
  Eigen::VectorXd x(n);
  x[0] = engine.normal();
  const double innov = std::sqrt(1.0 - rho * rho);
  for (int i = 1; i < n; ++i) x[i] = rho * x[i - 1] + innov * engine.normal();
  return x;
}

}  // namespace

TEST_CASE("burn and thin keep the documented rows") {
  const auto m = iota_matrix(10);
  const auto kept = burn_thin(m, 2, 3);
  REQUIRE(kept.rows() == 3);
  CHECK(kept(0, 0) == 2.0);
  CHECK(kept(1, 0) == 5.0);
  CHECK(kept(2, 0) == 8.0);

  CHECK(burn_thin(iota_matrix(25000), 1000, 40).rows() == 600);
  CHECK(burn_thin(m, 0, 1).rows() == 10);
  CHECK(burn_thin(m, 9, 1).rows() == 1);
  CHECK(burn_thin(m, 0, 100).rows() == 1);

  CHECK_THROWS_AS(burn_thin(m, 10, 1), Error);
  CHECK_THROWS_AS(burn_thin(m, -1, 1), Error);
  CHECK_THROWS_AS(burn_thin(m, 0, 0), Error);
}

TEST_CASE("scale reduction factor closed form on a tiny pair of chains") {
  Eigen::VectorXd a(3), b(3);
  a << 1.0, 2.0, 3.0;
  b << 2.0, 3.0, 4.0;
  // W = 1, B = 1.5, n = 3: sqrt((2/3 + 0.5) / 1) = sqrt(7/6).
  CHECK(gelman_rubin({a, b}) ==
        doctest::Approx(std::sqrt(7.0 / 6.0)).epsilon(1e-14));
}

TEST_CASE("scale reduction near one for matched chains, large for split ones") {
  const int n = 5000;
  std::vector<Eigen::VectorXd> same;
  for (std::uint64_t c = 0; c < 3; ++c) same.push_back(ar1_chain(0.0, n, c));
  CHECK(gelman_rubin(same) < 1.01);

  auto shifted = same;
  shifted[2].array() += 3.0;
  CHECK(gelman_rubin(shifted) > 1.5);
}

TEST_CASE("scale reduction factor input validation") {
  Eigen::VectorXd a(3), b(2);
  a << 1.0, 2.0, 3.0;
  b << 1.0, 2.0;
  CHECK_THROWS_AS(gelman_rubin({a}), Error);
  CHECK_THROWS_AS(gelman_rubin({a, b}), Error);
  Eigen::VectorXd one(1), other(1);
  one << 1.0;
  other << 2.0;
  CHECK_THROWS_AS(gelman_rubin({one, other}), Error);
}

TEST_CASE("effective sample size tracks the autocorrelation time") {
  const int n = 20000;
  const auto iid = ar1_chain(0.0, n, 10);
  CHECK(effective_sample_size(iid) > 0.8 * n);
  CHECK(effective_sample_size(iid) <= double(n));

  // AR(1) theory: ESS = n (1 - rho) / (1 + rho).
  const auto sticky = ar1_chain(0.8, n, 11);
  const double expected = n * (1.0 - 0.8) / (1.0 + 0.8);
  CHECK(effective_sample_size(sticky) ==
        doctest::Approx(expected).epsilon(0.2));

  Eigen::VectorXd constant = Eigen::VectorXd::Constant(100, 3.5);
  CHECK(effective_sample_size(constant) == 100.0);
}

TEST_CASE("hpd interval is the narrowest window, leftmost on ties") {
  SUBCASE("uniform grid ties resolve to the left") {
    // Integer spacing keeps every candidate window width exactly equal, so
    // the tie break is observable without floating point wobble.
    std::vector<double> grid(1000);
    for (int i = 0; i < 1000; ++i) grid[std::size_t(i)] = double(i);
    const auto [lo, hi] = hpd_interval(grid, 0.95);
    CHECK(lo == 0.0);
    CHECK(hi == 949.0);
  }

  SUBCASE("outliers are excluded") {
    const std::vector<double> samples{1.0, 2.0, 3.0, 100.0};
    const auto [lo, hi] = hpd_interval(samples, 0.5);
    CHECK(lo == 1.0);
    CHECK(hi == 2.0);
  }

  SUBCASE("full mass spans the data") {
    const std::vector<double> samples{4.0, 1.0, 2.0};
    const auto [lo, hi] = hpd_interval(samples, 1.0);
    CHECK(lo == 1.0);
    CHECK(hi == 4.0);
  }

  SUBCASE("normal samples give the familiar interval") {
    auto engine = RngStream(12).engine();
    std::vector<double> draws(100000);
    for (auto &d : draws) d = engine.normal();
    const auto [lo, hi] = hpd_interval(draws, 0.95);
    CHECK(lo == doctest::Approx(-1.96).epsilon(0.03));
    CHECK(hi == doctest::Approx(1.96).epsilon(0.03));
  }

  SUBCASE("validation") {
    const std::vector<double> samples{1.0, 2.0};
    CHECK_THROWS_AS(hpd_interval(samples, 0.0), Error);
    CHECK_THROWS_AS(hpd_interval(samples, 1.5), Error);
    CHECK_THROWS_AS(hpd_interval(std::vector<double>{}, 0.5), Error);
  }
}

TEST_CASE("posterior mean squared error identity") {
  const std::vector<double> samples{1.0, 2.0, 3.0};
  CHECK(pmse(2.0, samples) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  auto engine = RngStream(13).engine();
  std::vector<double> draws(5000);
  for (auto &d : draws) d = 2.0 * engine.normal() + 0.7;
  const double truth = 1.3;
  const double mean = test::mean_of(draws);
  double pop_var = 0.0;
  for (const double d : draws) pop_var += (d - mean) * (d - mean);
  pop_var /= double(draws.size());
  const double bias = truth - mean;
  CHECK(pmse(truth, draws) ==
        doctest::Approx(bias * bias + pop_var).epsilon(1e-12));
}

TEST_CASE("type seven quantiles interpolate order statistics") {
  const std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
  CHECK(quantile_sorted(sorted, 0.0) == 1.0);
  CHECK(quantile_sorted(sorted, 1.0) == 4.0);
  CHECK(quantile_sorted(sorted, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(quantile_sorted(sorted, 0.25) == doctest::Approx(1.75).epsilon(1e-15));
  const std::vector<double> single{7.0};
  CHECK(quantile_sorted(single, 0.3) == 7.0);
}

TEST_CASE("posterior predictive bands are ordered and reproducible") {
  const auto spec = sir_spec(200);
  ParameterSpace space;
  space.kinds = {ParamKind::beta, ParamKind::gamma};
  Eigen::MatrixXd samples(40, 2);
  auto engine = RngStream(14).engine();
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    samples(i, 0) = 1.5 + engine.uniform();
    samples(i, 1) = 0.8 + 0.4 * engine.uniform();
  }
  const std::vector<double> grid{1.0, 2.0, 3.0};
  const StateVector init{190, 10, 0, 0};

  const auto bands = trajectory_bands(spec, space, samples, init, 0.0, grid,
                                      200, RngStream(15));
  REQUIRE(bands.times == grid);
  REQUIRE(bands.lower.size() == 3);
  REQUIRE(bands.median.size() == 3);
  REQUIRE(bands.upper.size() == 3);
  for (std::size_t c = 0; c < 3; ++c) {
    REQUIRE(bands.lower[c].size() == grid.size());
    for (std::size_t t = 0; t < grid.size(); ++t) {
      CHECK(bands.lower[c][t] <= bands.median[c][t]);
      CHECK(bands.median[c][t] <= bands.upper[c][t]);
      CHECK(bands.lower[c][t] >= 0.0);
      CHECK(bands.upper[c][t] <= 200.0);
    }
  }

  const auto again = trajectory_bands(spec, space, samples, init, 0.0, grid,
                                      200, RngStream(15));
  CHECK(bands.lower == again.lower);
  CHECK(bands.median == again.median);
  CHECK(bands.upper == again.upper);
}

TEST_CASE("posterior summary pools chains and names parameters") {
  Eigen::MatrixXd a(4, 2), b(4, 2);
  a << 1.0, 10.0, 2.0, 20.0, 3.0, 30.0, 4.0, 40.0;
  b << 2.0, 20.0, 3.0, 30.0, 4.0, 40.0, 5.0, 50.0;
  const auto summary = summarize_posterior({a, b}, {"beta", "gamma"});
  REQUIRE(summary.names == std::vector<std::string>{"beta", "gamma"});

  // Pooled first component: {1,2,3,4,2,3,4,5}.
  CHECK(summary.mean[0] == doctest::Approx(3.0).epsilon(1e-15));
  const double var = (4.0 + 1.0 + 0.0 + 1.0 + 1.0 + 0.0 + 1.0 + 4.0) / 7.0;
  CHECK(summary.sd[0] == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  CHECK(summary.mean[1] == doctest::Approx(30.0).epsilon(1e-15));

  Eigen::VectorXd col_a = a.col(0), col_b = b.col(0);
  CHECK(summary.rhat[0] ==
        doctest::Approx(gelman_rubin({col_a, col_b})).epsilon(1e-14));
  CHECK(summary.ess[0] > 0.0);
  CHECK(summary.ess[0] <= 8.0);
  CHECK(summary.hpd[0].first >= 1.0);
  CHECK(summary.hpd[0].second <= 5.0);
}

TEST_CASE("posterior summary handles a single chain") {
  Eigen::MatrixXd a(5, 1);
  a << 1.0, 2.0, 3.0, 4.0, 5.0;
  const auto summary = summarize_posterior({a}, {"beta"});
  CHECK(summary.mean[0] == doctest::Approx(3.0));
  CHECK(std::isnan(summary.rhat[0]));
}

TEST_CASE("posterior summary rejects mismatched chains") {
  Eigen::MatrixXd a(4, 2), b(3, 2), c(4, 1);
  a.setZero();
  b.setZero();
  c.setZero();
  CHECK_THROWS_AS(summarize_posterior({a, b}, {"x", "y"}), Error);
  CHECK_THROWS_AS(summarize_posterior({a, c}, {"x", "y"}), Error);
  CHECK_THROWS_AS(summarize_posterior({a}, {"x"}), Error);
  CHECK_THROWS_AS(summarize_posterior({}, {}), Error);
}
