// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/gillespie.hpp"

#include <cmath>

#include "epinfer/errors.hpp"

namespace epinfer {

namespace {

void check_window(double t0, double t1) {
  if (!(std::isfinite(t0) && std::isfinite(t1) && t1 >= t0)) {
    throw Error(Errc::invalid_argument,
                "time window must be finite with t_end >= t0");
  }
}

inline void apply_event(const ModelSpec &spec, int j, StateVector &x) noexcept {
  const auto &change = spec.events[j].change;
  for (int c = 0; c < spec.n_compartments; ++c) x[c] += change[c];
}

// Draws the next jump; returns the channel index, or -1 when absorbed or the
// jump falls beyond t_end. `t` is advanced to the jump time on success.
inline int next_jump(const ModelSpec &spec, const std::array<double, 3> &rates,
                     const StateVector &x, double &t, double t_end,
                     Xoshiro256pp &engine) noexcept {
  double a[4];
  propensities(spec, rates, x, a);
  double a_sum = 0.0;
  for (int j = 0; j < spec.n_events; ++j) a_sum += a[j];
  if (a_sum <= 0.0) return -1;

  t += -std::log(engine.uniform_oc()) / a_sum;
  if (t > t_end) return -1;

  const double threshold = engine.uniform_oc() * a_sum;
  double acc = 0.0;
  for (int j = 0; j < spec.n_events; ++j) {
    acc += a[j];
    if (acc >= threshold) return j;
  }
  return spec.n_events - 1;  // unreachable unless rounding starves the prefix
}

}  // namespace

Trajectory gillespie_run(const ModelSpec &spec, const Params &params,
                         const StateVector &init, double t0, double t_end,
                         Xoshiro256pp &engine,
                         std::vector<EventRecord> *events) {
  validate_state(spec, init);
  validate_params(spec, params);
  check_window(t0, t_end);

  const auto rates = params.rate_table();
  Trajectory out;
  out.times.push_back(t0);
  out.states.push_back(init);

  StateVector x = init;
  double t = t0;
  for (;;) {
    const int j = next_jump(spec, rates, x, t, t_end, engine);
    if (j < 0) break;
    apply_event(spec, j, x);
    out.times.push_back(t);
    out.states.push_back(x);
    if (events) events->push_back({t, j});
  }
  return out;
}

StateVector gillespie_propagate(const ModelSpec &spec, const Params &params,
                                StateVector state, double t0, double t1,
                                Xoshiro256pp &engine) {
  validate_state(spec, state);
  validate_params(spec, params);
  check_window(t0, t1);
  return gillespie_propagate_raw(spec, params.rate_table(), state, t0, t1,
                                 engine);
}

StateVector gillespie_propagate_raw(const ModelSpec &spec,
                                    const std::array<double, 3> &rates,
                                    StateVector state, double t0, double t1,
                                    Xoshiro256pp &engine) noexcept {
  double t = t0;
  for (;;) {
    const int j = next_jump(spec, rates, state, t, t1, engine);
    if (j < 0) return state;
    apply_event(spec, j, state);
  }
}

Trajectory gillespie_run_grid(const ModelSpec &spec, const Params &params,
                              const StateVector &init, double t0,
                              std::span<const double> t_grid,
                              Xoshiro256pp &engine) {
  validate_state(spec, init);
  validate_params(spec, params);
  if (t_grid.empty()) {
    throw Error(Errc::invalid_argument, "time grid must be nonempty");
  }
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    if (!(t_grid[k + 1] > t_grid[k])) {
      throw Error(Errc::invalid_argument,
                  "time grid must be strictly increasing");
    }
  }
  check_window(t0, t_grid.front());

  const auto rates = params.rate_table();
  Trajectory out;
  out.times.assign(t_grid.begin(), t_grid.end());
  out.states.reserve(t_grid.size());

  StateVector x = init;
  double t_prev = t0;
  for (const double t : t_grid) {
    x = gillespie_propagate_raw(spec, rates, x, t_prev, t, engine);
    out.states.push_back(x);
    t_prev = t;
  }
  return out;
}

}  // namespace epinfer
