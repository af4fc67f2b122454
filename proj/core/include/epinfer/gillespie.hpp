// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_GILLESPIE_HPP
#define EPINFER_GILLESPIE_HPP

#include <span>
#include <vector>

#include "epinfer/model.hpp"
#include "epinfer/rng.hpp"

namespace epinfer {

struct EventRecord {
  double time;
  int event;  // index into ModelSpec::events
};

// Exact jump process simulation (direct method). Waiting times are
// exponential in the total propensity; the firing channel is the smallest j
// whose propensity prefix sum reaches u * total with u drawn from (0, 1], so
// channels with zero propensity can never fire. Simulation stops when the
// process is absorbed (zero total propensity) or the next jump would land
// beyond t_end.

// Runs from `init` at t0 and records the post-jump state at every jump.
// times[0] = t0 with states[0] = init. If `events` is non-null, one record
// per jump is appended in time order.
Trajectory gillespie_run(const ModelSpec &spec, const Params &params,
                         const StateVector &init, double t0, double t_end,
                         Xoshiro256pp &engine,
                         std::vector<EventRecord> *events = nullptr);

// Advances `state` from t0 to t1 and returns the state at t1. This is the
// particle filter's transition kernel; by memorylessness restarting the
// clocks at t0 leaves the law of the process unchanged.
StateVector gillespie_propagate(const ModelSpec &spec, const Params &params,
                                StateVector state, double t0, double t1,
                                Xoshiro256pp &engine);

// Same transition kernel without input validation, for hot loops that have
// validated (spec, rates) once. `rates` must come from Params::rate_table()
// of a parameter set valid for `spec`.
StateVector gillespie_propagate_raw(const ModelSpec &spec,
                                    const std::array<double, 3> &rates,
                                    StateVector state, double t0, double t1,
                                    Xoshiro256pp &engine) noexcept;

// Runs the process once and samples it at the given strictly increasing grid
// times (each >= t0), returning one state per grid point. Segments between
// grid points are advanced with gillespie_propagate.
Trajectory gillespie_run_grid(const ModelSpec &spec, const Params &params,
                              const StateVector &init, double t0,
                              std::span<const double> t_grid,
                              Xoshiro256pp &engine);

}  // namespace epinfer

#endif  // EPINFER_GILLESPIE_HPP
