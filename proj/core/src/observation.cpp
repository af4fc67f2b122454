// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/observation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epinfer/errors.hpp"

namespace epinfer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

double log_binomial_pmf(double y, std::int64_t n, double p) noexcept {
  if (!(y >= 0.0) || y > static_cast<double>(n) || y != std::floor(y)) {
    return kNegInf;
  }
  const auto k = static_cast<std::int64_t>(y);
  if (p >= 1.0) return k == n ? 0.0 : kNegInf;
  const double lchoose =
      log_factorial(n) - log_factorial(k) - log_factorial(n - k);
  return lchoose + static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

double log_normal_pdf(double y, double mean, double var) noexcept {
  const double d = y - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double gaussian_variance(const ObservationModel &model, double x) noexcept {
  return std::fmax(model.n_ratio * x, model.variance_floor);
}

}  // namespace

double log_factorial(std::int64_t n) noexcept {
  // Kahan-compensated prefix sums of log(i); drift over the table length
  // stays near one ulp instead of growing with n.
  static const std::vector<double> table = [] {
    std::vector<double> t(std::size_t{1} << 17);
    t[0] = 0.0;
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      const double term = std::log(static_cast<double>(i)) - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
      t[i] = sum;
    }
    return t;
  }();
  if (n < 0) return kNegInf;
  if (static_cast<std::size_t>(n) < table.size()) return table[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

ObservationModel gaussian_observation(double n_ratio) {
  ObservationModel model;
  model.kind = ObsKind::gaussian;
  model.n_ratio = n_ratio;
  return model;
}

ObservationModel binomial_observation(double p_obs) {
  ObservationModel model;
  model.kind = ObsKind::binomial;
  model.p_obs = p_obs;
  return model;
}

ObservationModel with_p_obs(ObservationModel model, double p_obs) {
  model.p_obs = p_obs;
  return model;
}

void validate_observation_model(const ObservationModel &model,
                                const ModelSpec &spec) {
  if (model.kind == ObsKind::gaussian) {
    require(std::isfinite(model.n_ratio) && model.n_ratio > 0.0,
            "n_ratio must be positive");
    require(std::isfinite(model.variance_floor) && model.variance_floor > 0.0,
            "variance_floor must be positive");
  } else {
    require(std::isfinite(model.p_obs) && model.p_obs > 0.0 &&
                model.p_obs <= 1.0,
            "p_obs must lie in (0, 1]");
  }
  for (const int c : model.observed) {
    require(c >= 0 && c < spec.n_compartments,
            "observed compartment index outside the model");
  }
  // Duplicates would produce two identical columns in the observed series.
  std::vector<int> sorted = model.observed;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "observed compartments must be distinct");
}

std::vector<int> resolve_observed(const ObservationModel &model,
                                  const ModelSpec &spec) {
  if (!model.observed.empty()) return model.observed;
  std::vector<int> all(static_cast<std::size_t>(spec.n_compartments));
  for (int c = 0; c < spec.n_compartments; ++c) all[c] = c;
  return all;
}

void validate_observed_series(const ObservedSeries &series,
                              const ModelSpec &spec) {
  require(!series.times.empty(), "observed series must be nonempty");
  require(series.values.size() == series.times.size(),
          "observed series row count must match its times");
  for (std::size_t k = 0; k + 1 < series.times.size(); ++k) {
    require(series.times[k + 1] > series.times[k],
            "observation times must be strictly increasing");
  }
  require(!series.compartments.empty(),
          "observed series must cover at least one compartment");
  for (const int c : series.compartments) {
    require(c >= 0 && c < spec.n_compartments,
            "observed compartment index outside the model");
  }
  for (const auto &row : series.values) {
    require(row.size() == series.compartments.size(),
            "observation row width must match the compartment list");
  }
}

namespace {

template <typename StateT, typename MeanOf>
ObservedSeries simulate_rows(const ModelSpec &spec,
                             const ObservationModel &model,
                             const std::vector<double> &times,
                             const std::vector<StateT> &states,
                             MeanOf mean_of, Xoshiro256pp &engine) {
  validate_observation_model(model, spec);
  ObservedSeries out;
  out.times = times;
  out.compartments = resolve_observed(model, spec);
  out.values.reserve(states.size());
  for (const auto &state : states) {
    std::vector<double> row(out.compartments.size());
    for (std::size_t m = 0; m < out.compartments.size(); ++m) {
      const double x = mean_of(state[out.compartments[m]]);
      if (model.kind == ObsKind::gaussian) {
        row[m] = x + std::sqrt(gaussian_variance(model, x)) * engine.normal();
      } else {
        const auto n = static_cast<std::int64_t>(
            std::fmax(std::nearbyint(x), 0.0));
        row[m] = static_cast<double>(binomial_draw(n, model.p_obs, engine));
      }
    }
    out.values.push_back(std::move(row));
  }
  return out;
}

}  // namespace

ObservedSeries simulate_observation(const ModelSpec &spec,
                                    const ObservationModel &model,
                                    const Trajectory &hidden,
                                    Xoshiro256pp &engine) {
  return simulate_rows(
      spec, model, hidden.times, hidden.states,
      [](std::int64_t x) { return static_cast<double>(x); }, engine);
}

ObservedSeries simulate_observation(const ModelSpec &spec,
                                    const ObservationModel &model,
                                    const RealTrajectory &hidden,
                                    Xoshiro256pp &engine) {
  return simulate_rows(
      spec, model, hidden.times, hidden.states, [](double x) { return x; },
      engine);
}

double log_obs_density(const ObservationModel &model,
                       std::span<const int> comps, const StateVector &x,
                       std::span<const double> y) noexcept {
  double total = 0.0;
  for (std::size_t m = 0; m < comps.size(); ++m) {
    const auto hidden = x[comps[m]];
    if (model.kind == ObsKind::gaussian) {
      const double mean = static_cast<double>(hidden);
      total += log_normal_pdf(y[m], mean, gaussian_variance(model, mean));
    } else {
      const double term = log_binomial_pmf(y[m], hidden, model.p_obs);
      if (term == kNegInf) return kNegInf;
      total += term;
    }
  }
  return total;
}

}  // namespace epinfer
