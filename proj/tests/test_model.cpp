// Apache License, Version 2.0, refer to LICENSE.txt

#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "epinfer/errors.hpp"
#include "epinfer/model.hpp"

using namespace epinfer;

TEST_CASE("parameter validation accepts zero rates and rejects bad input") {
  CHECK_NOTHROW(Params(0.0, 0.0));
  CHECK_NOTHROW(Params(2.0, 1.0, 0.5, 0.1));
  CHECK_THROWS_AS(Params(-1.0, 1.0), Error);
  CHECK_THROWS_AS(Params(1.0, std::nan("")), Error);
  CHECK_THROWS_AS(Params(1.0, 1.0, -0.5), Error);
  CHECK_THROWS_AS(Params(1.0, 1.0, {}, 0.0), Error);
  CHECK_THROWS_AS(Params(1.0, 1.0, {}, 1.5), Error);
  CHECK_NOTHROW(Params(1.0, 1.0, {}, 1.0));
}

TEST_CASE("basic reproduction number is the rate ratio") {
  CHECK(basic_reproduction_number(Params(2.0, 1.0)) == doctest::Approx(2.0));
  CHECK(basic_reproduction_number(Params(3.0, 2.0)) == doctest::Approx(1.5));
  CHECK_THROWS_AS(basic_reproduction_number(Params(1.0, 0.0)), Error);
}

TEST_CASE("state validation enforces counts and population") {
  const auto spec = sir_spec(4820);
  CHECK_NOTHROW(validate_state(spec, {4800, 20, 0, 0}));
  CHECK_THROWS_AS(validate_state(spec, {4800, 20, 1, 0}), Error);
  CHECK_THROWS_AS(validate_state(spec, {4800, -1, 21, 0}), Error);
  CHECK_THROWS_AS(validate_state(spec, {4800, 20, 0, 1}), Error);
}

TEST_CASE("sir propensities match hand-computed values") {
  // beta S I / N = 2 * 4800 * 20 / 4820, gamma I = 20.
  const auto spec = sir_spec(4820);
  const Params params(2.0, 1.0);
  const auto rates = params.rate_table();
  std::array<double, kMaxCompartments> a{};
  propensities(spec, rates, StateVector{4800, 20, 0, 0}, a.data());
  CHECK(a[0] == doctest::Approx(39.83402489626556).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("seir propensities match hand-computed values") {
  // Infection reads the I compartment, progression reads E.
  const auto spec = seir_spec(4820);
  const Params params(4.0, 1.0, 1.0);
  const auto rates = params.rate_table();
  std::array<double, kMaxCompartments> a{};
  propensities(spec, rates, StateVector{4800, 0, 20, 0}, a.data());
  CHECK(a[0] == doctest::Approx(79.66804979253112).epsilon(1e-14));
  CHECK(a[1] == doctest::Approx(0.0));
  CHECK(a[2] == doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("event stoichiometry conserves the population") {
  for (const auto &spec : {sir_spec(100), seir_spec(100)}) {
    for (int j = 0; j < spec.n_events; ++j) {
      int sum = 0;
      for (int c = 0; c < spec.n_compartments; ++c)
        sum += spec.events[std::size_t(j)].change[std::size_t(c)];
      CHECK(sum == 0);
    }
  }
}

TEST_CASE("compartment lookup by name") {
  const auto spec = seir_spec(10);
  CHECK(compartment_index(spec, "S") == 0);
  CHECK(compartment_index(spec, "E") == 1);
  CHECK(compartment_index(spec, "I") == 2);
  CHECK(compartment_index(spec, "R") == 3);
  CHECK(compartment_index(spec, "X") == -1);
  CHECK(spec.infected_index == 2);
  CHECK(spec.removed_index == 3);
}

TEST_CASE("seir requires a progression rate") {
  CHECK_THROWS_AS(validate_params(seir_spec(10), Params(1.0, 1.0)), Error);
  CHECK_NOTHROW(validate_params(seir_spec(10), Params(1.0, 1.0, 1.0)));
  CHECK_NOTHROW(validate_params(sir_spec(10), Params(1.0, 1.0)));
}

TEST_CASE("deterministic integration reproduces exponential decay") {
  // With beta = 0 the infected pool decays as I0 exp(-gamma t).
  const auto spec = sir_spec(4820);
  const Params params(0.0, 1.0);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto traj =
      integrate_deterministic(spec, params, StateVector{4800, 20, 0, 0}, grid);
  REQUIRE(traj.times.size() == 3);
  CHECK(traj.states[0][1] == doctest::Approx(20.0));
  CHECK(traj.states[1][1] ==
        doctest::Approx(20.0 * std::exp(-0.5)).epsilon(1e-9));
  CHECK(traj.states[2][1] ==
        doctest::Approx(7.357588823428847).epsilon(1e-9));
  for (const auto &x : traj.states) {
    double total = 0.0;
    for (int c = 0; c < spec.n_compartments; ++c) total += x[std::size_t(c)];
    CHECK(total == doctest::Approx(4820.0).epsilon(1e-9));
  }
}

TEST_CASE("deterministic integration lands exactly on grid points") {
  const auto spec = sir_spec(4820);
  const Params params(2.0, 1.0);
  const std::vector<double> grid{0.0, 0.3, 1.7, 2.0};
  const auto traj =
      integrate_deterministic(spec, params, StateVector{4800, 20, 0, 0}, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(traj.times[i] == grid[i]);
  // Susceptibles fall, removals rise along an epidemic path.
  CHECK(traj.states[3][0] < traj.states[0][0]);
  CHECK(traj.states[3][2] > 0.0);
}

TEST_CASE("deterministic integration rejects malformed grids") {
  const auto spec = sir_spec(4820);
  const Params params(2.0, 1.0);
  const StateVector init{4800, 20, 0, 0};
  CHECK_THROWS_AS(
      integrate_deterministic(spec, params, init, std::vector<double>{}),
      Error);
  CHECK_THROWS_AS(integrate_deterministic(spec, params, init,
                                          std::vector<double>{0.0, 1.0, 1.0}),
                  Error);
  CHECK_THROWS_AS(integrate_deterministic(spec, params, init,
                                          std::vector<double>{0.0, 1.0}, 0.0),
                  Error);
}
