// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "epinfer/errors.hpp"

namespace epinfer {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

Params::Params(double beta_in, double gamma_in, std::optional<double> alpha_in,
               std::optional<double> p_obs_in)
    : beta(beta_in), gamma(gamma_in), alpha(alpha_in), p_obs(p_obs_in) {
  require(finite_nonneg(beta), "beta must be finite and nonnegative");
  require(finite_nonneg(gamma), "gamma must be finite and nonnegative");
  if (alpha) require(finite_nonneg(*alpha), "alpha must be finite and nonnegative");
  if (p_obs) {
    require(std::isfinite(*p_obs) && *p_obs > 0.0 && *p_obs <= 1.0,
            "p_obs must lie in (0, 1]");
  }
}

std::array<double, 3> Params::rate_table() const noexcept {
  return {beta, gamma,
          alpha ? *alpha : std::numeric_limits<double>::quiet_NaN()};
}

ModelSpec sir_spec(std::int64_t population) {
  require(population > 0, "population must be positive");
  ModelSpec spec{};
  spec.kind = ModelKind::sir;
  spec.population = population;
  spec.n_compartments = 3;
  spec.n_events = 2;
  spec.events[0] = {Event::Form::mass_action, RateParam::beta, 0, 1,
                    {-1, 1, 0, 0}};
  spec.events[1] = {Event::Form::linear, RateParam::gamma, 1, 0, {0, -1, 1, 0}};
  spec.compartment_names = {"S", "I", "R", ""};
  spec.infected_index = 1;
  spec.removed_index = 2;
  return spec;
}

ModelSpec seir_spec(std::int64_t population) {
  require(population > 0, "population must be positive");
  ModelSpec spec{};
  spec.kind = ModelKind::seir;
  spec.population = population;
  spec.n_compartments = 4;
  spec.n_events = 3;
  spec.events[0] = {Event::Form::mass_action, RateParam::beta, 0, 2,
                    {-1, 1, 0, 0}};
  spec.events[1] = {Event::Form::linear, RateParam::alpha, 1, 0, {0, -1, 1, 0}};
  spec.events[2] = {Event::Form::linear, RateParam::gamma, 2, 0, {0, 0, -1, 1}};
  spec.compartment_names = {"S", "E", "I", "R"};
  spec.infected_index = 2;
  spec.removed_index = 3;
  return spec;
}

void validate_state(const ModelSpec &spec, const StateVector &state) {
  std::int64_t total = 0;
  for (int c = 0; c < kMaxCompartments; ++c) {
    if (c < spec.n_compartments) {
      require(state[c] >= 0, "compartment counts must be nonnegative");
      total += state[c];
    } else {
      require(state[c] == 0, "unused compartment entries must be zero");
    }
  }
  if (total != spec.population) {
    std::ostringstream msg;
    msg << "compartment counts sum to " << total << ", expected population "
        << spec.population;
    throw Error(Errc::invalid_argument, msg.str());
  }
}

void validate_params(const ModelSpec &spec, const Params &params) {
  if (spec.kind == ModelKind::seir && !params.alpha) {
    throw Error(Errc::invalid_argument,
                "SEIR dynamics require a progression rate alpha");
  }
  (void)params;
}

double basic_reproduction_number(const Params &params) {
  require(params.gamma > 0.0,
          "basic reproduction number requires gamma > 0");
  return params.beta / params.gamma;
}

int compartment_index(const ModelSpec &spec, std::string_view name) noexcept {
  for (int c = 0; c < spec.n_compartments; ++c) {
    if (spec.compartment_names[c] == name) return c;
  }
  return -1;
}

namespace {

void drift(const ModelSpec &spec, const std::array<double, 3> &rates,
           const RealState &x, RealState &dx) {
  double a[4];
  propensities(spec, rates, x, a);
  dx = {0.0, 0.0, 0.0, 0.0};
  for (int j = 0; j < spec.n_events; ++j) {
    for (int c = 0; c < spec.n_compartments; ++c) {
      dx[c] += a[j] * static_cast<double>(spec.events[j].change[c]);
    }
  }
}

void rk4_step(const ModelSpec &spec, const std::array<double, 3> &rates,
              RealState &x, double h) {
  RealState k1, k2, k3, k4, tmp;
  drift(spec, rates, x, k1);
  for (int c = 0; c < kMaxCompartments; ++c) tmp[c] = x[c] + 0.5 * h * k1[c];
  drift(spec, rates, tmp, k2);
  for (int c = 0; c < kMaxCompartments; ++c) tmp[c] = x[c] + 0.5 * h * k2[c];
  drift(spec, rates, tmp, k3);
  for (int c = 0; c < kMaxCompartments; ++c) tmp[c] = x[c] + h * k3[c];
  drift(spec, rates, tmp, k4);
  for (int c = 0; c < kMaxCompartments; ++c) {
    x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
  }
}

}  // namespace

RealTrajectory integrate_deterministic(const ModelSpec &spec,
                                       const Params &params,
                                       const StateVector &init,
                                       std::span<const double> t_grid,
                                       double dt) {
  validate_state(spec, init);
  validate_params(spec, params);
  require(!t_grid.empty(), "time grid must be nonempty");
  require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    require(t_grid[k + 1] > t_grid[k], "time grid must be strictly increasing");
  }

  const auto rates = params.rate_table();
  RealState x{};
  for (int c = 0; c < kMaxCompartments; ++c) {
    x[c] = static_cast<double>(init[c]);
  }

  RealTrajectory out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.states.reserve(t_grid.size());
  out.states.push_back(x);

  const double n = static_cast<double>(spec.population);
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    const double gap = t_grid[k + 1] - t_grid[k];
    const auto n_steps =
        static_cast<std::size_t>(std::ceil(gap / dt - 1e-12));
    const double h = gap / static_cast<double>(n_steps);
    for (std::size_t s = 0; s < n_steps; ++s) rk4_step(spec, rates, x, h);

    double total = 0.0;
    for (int c = 0; c < spec.n_compartments; ++c) total += x[c];
    if (std::abs(total - n) > 1e-6 * n) {
      throw Error(Errc::numeric,
                  "integrator lost mass conservation; reduce dt");
    }
    out.states.push_back(x);
  }
  return out;
}

}  // namespace epinfer
