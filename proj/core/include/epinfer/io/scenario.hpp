// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_IO_SCENARIO_HPP
#define EPINFER_IO_SCENARIO_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epinfer/metropolis.hpp"
#include "epinfer/model.hpp"
#include "epinfer/observation.hpp"

namespace epinfer {

// How the synthetic data for a scenario is generated.
struct DataConfig {
  enum class Source { deterministic, stochastic };

  Source source = Source::deterministic;
  double t0 = 0.0;
  double t_end = 0.0;
  double dt = 1.0;       // sampling interval; (t_end - t0) / dt must be integral
  double ode_dt = 1e-3;  // integrator step for deterministic data
};

struct ProposalConfig {
  enum class Mode { pilot, adaptive, fixed };

  Mode mode = Mode::pilot;
  std::optional<double> h;
  std::optional<Eigen::MatrixXd> sigma;  // fixed mode only
  int adapt_t0 = 1000;
  double adapt_epsilon = 1e-4;
  int pilot_steps = 1000;
  int pilot_warmup = 100;
};

enum class Method { pmmh, abc };

struct InferenceConfig {
  Method method = Method::pmmh;
  std::vector<ParamKind> parameters;
  Eigen::VectorXd prior_lower;
  Eigen::VectorXd prior_upper;
  std::optional<Eigen::VectorXd> initial;  // defaults to the prior box centre
  int chains = 1;
  int steps = 0;
  int particles = 100;
  std::int64_t burn = 0;
  std::int64_t thin = 1;
  ProposalConfig proposal;
  // rejection sampler settings
  double epsilon = 150.0;
  int accept = 1000;
  std::int64_t max_attempts = 10000000;
};

// One self contained synthetic study: model and ground truth, how data is
// generated and observed, and how parameters are recovered.
struct ScenarioConfig {
  int schema = 1;
  std::string name;
  ModelKind model_kind = ModelKind::sir;
  std::int64_t population = 0;
  StateVector init{};
  Params truth{1.0, 1.0};
  DataConfig data;
  ObservationModel observation;
  InferenceConfig inference;
  std::optional<std::string> sweep_parameter;
  std::vector<double> sweep_values;

  ModelSpec spec() const;

  // t0, t0 + dt, ..., t_end.
  std::vector<double> sample_grid() const;

  // sample_grid without the initial time: where observations live.
  std::vector<double> observation_times() const;

  ParameterSpace parameter_space() const;
  Prior prior() const;
  Eigen::VectorXd initial_theta() const;
  std::vector<std::string> parameter_names() const;
};

// Parses and fully validates a scenario. Unknown keys anywhere in the
// document are rejected (Errc::config), as are values outside their domain.
ScenarioConfig parse_scenario(const std::string &json_text);
ScenarioConfig load_scenario(const std::filesystem::path &path);

// Copy of `config` with the swept field replaced. Valid sweep parameters:
// observation.n_ratio, observation.p_obs, data.t_end.
ScenarioConfig with_sweep_value(const ScenarioConfig &config, double value);

// Directory label for one sweep value, e.g. "value_0.05".
std::string sweep_label(double value);

}  // namespace epinfer

#endif  // EPINFER_IO_SCENARIO_HPP
