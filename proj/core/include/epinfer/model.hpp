// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_MODEL_HPP
#define EPINFER_MODEL_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace epinfer {

inline constexpr int kMaxCompartments = 4;

// Occupancy counts per compartment. Entries beyond the model's compartment
// count stay zero so the array compares and hashes uniformly.
using StateVector = std::array<std::int64_t, kMaxCompartments>;

// Continuous relaxation of StateVector used by the deterministic integrator.
using RealState = std::array<double, kMaxCompartments>;

enum class ModelKind { sir, seir };

// Index into Params::rate_table().
enum class RateParam { beta = 0, gamma = 1, alpha = 2 };

// Model rates plus the detection probability of the thinned observation
// channel. Rates must be finite and nonnegative; zero is allowed so reduced
// dynamics (no transmission, no removal) stay expressible. Strict positivity
// is the inference layer's concern, enforced through priors and proposal
// rejection. p_obs, when present, must lie in (0, 1].
struct Params {
  double beta;
  double gamma;
  std::optional<double> alpha;
  std::optional<double> p_obs;

  Params(double beta_in, double gamma_in,
         std::optional<double> alpha_in = std::nullopt,
         std::optional<double> p_obs_in = std::nullopt);

  std::array<double, 3> rate_table() const noexcept;
};

// One reaction channel. Propensity is rate * x[a] * x[b] / N for the mass
// action form and rate * x[a] for the linear form; `change` is the state
// increment when the event fires and always sums to zero.
struct Event {
  enum class Form { mass_action, linear };

  Form form;
  RateParam rate;
  int a;
  int b;
  std::array<std::int8_t, kMaxCompartments> change;
};

struct ModelSpec {
  ModelKind kind;
  std::int64_t population;
  int n_compartments;
  int n_events;
  std::array<Event, 4> events;
  std::array<std::string_view, kMaxCompartments> compartment_names;
  int infected_index;
  int removed_index;
};

// Closed population SIR with frequency dependent transmission beta*S*I/N and
// removal gamma*I. Compartment order S, I, R.
ModelSpec sir_spec(std::int64_t population);

// Closed population SEIR: exposure beta*S*I/N, progression alpha*E, removal
// gamma*I. Compartment order S, E, I, R.
ModelSpec seir_spec(std::int64_t population);

// Throws Errc::invalid_argument unless counts are nonnegative, sum to the
// population, and unused trailing entries are zero.
void validate_state(const ModelSpec &spec, const StateVector &state);

// Throws Errc::invalid_argument if the model needs a rate the parameter set
// does not carry (alpha for SEIR).
void validate_params(const ModelSpec &spec, const Params &params);

// beta / gamma under frequency dependent transmission, for SIR and SEIR
// alike. Requires gamma > 0.
double basic_reproduction_number(const Params &params);

// Index of a compartment by name, or -1 if the model has no such compartment.
int compartment_index(const ModelSpec &spec, std::string_view name) noexcept;

inline void propensities(const ModelSpec &spec,
                         const std::array<double, 3> &rates,
                         const StateVector &x, double *out) noexcept {
  const double inv_n = 1.0 / static_cast<double>(spec.population);
  for (int j = 0; j < spec.n_events; ++j) {
    const Event &e = spec.events[j];
    const double r = rates[static_cast<int>(e.rate)];
    out[j] = e.form == Event::Form::mass_action
                 ? r * static_cast<double>(x[e.a]) *
                       static_cast<double>(x[e.b]) * inv_n
                 : r * static_cast<double>(x[e.a]);
  }
}

inline void propensities(const ModelSpec &spec,
                         const std::array<double, 3> &rates, const RealState &x,
                         double *out) noexcept {
  const double inv_n = 1.0 / static_cast<double>(spec.population);
  for (int j = 0; j < spec.n_events; ++j) {
    const Event &e = spec.events[j];
    const double r = rates[static_cast<int>(e.rate)];
    out[j] = e.form == Event::Form::mass_action ? r * x[e.a] * x[e.b] * inv_n
                                                : r * x[e.a];
  }
}

// Piecewise constant jump record sampled at grid times.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
};

struct RealTrajectory {
  std::vector<double> times;
  std::vector<RealState> states;
};

// Mean field limit of the jump process, integrated with classical fourth
// order Runge-Kutta at fixed step `dt` (substeps are shrunk uniformly so
// every grid point is hit exactly). t_grid must be strictly increasing;
// states[0] is `init` at t_grid[0]. The compartment sum is conserved by the
// drift identically; deviation beyond 1e-6 * N at any grid point is reported
// as Errc::numeric.
RealTrajectory integrate_deterministic(const ModelSpec &spec,
                                       const Params &params,
                                       const StateVector &init,
                                       std::span<const double> t_grid,
                                       double dt = 1e-3);

}  // namespace epinfer

#endif  // EPINFER_MODEL_HPP
