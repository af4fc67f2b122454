// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/io/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "epinfer/errors.hpp"

namespace epinfer {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string &path, const std::string &what) {
  throw Error(Errc::config, path + ": " + what);
}

void check_keys(const json &j, const std::string &path,
                std::initializer_list<const char *> allowed) {
  if (!j.is_object()) fail(path, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char *key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail(path, "unknown key \"" + it.key() + "\"");
  }
}

const json *find(const json &j, const char *key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json &need(const json &j, const std::string &path, const char *key) {
  const json *p = find(j, key);
  if (!p) fail(path, std::string("missing key \"") + key + "\"");
  return *p;
}

double as_double(const json &j, const std::string &path) {
  if (!j.is_number()) fail(path, "must be a number");
  return j.get<double>();
}

std::int64_t as_integer(const json &j, const std::string &path) {
  if (!j.is_number_integer()) fail(path, "must be an integer");
  return j.get<std::int64_t>();
}

std::string as_string(const json &j, const std::string &path) {
  if (!j.is_string()) fail(path, "must be a string");
  return j.get<std::string>();
}

Eigen::VectorXd as_vector(const json &j, const std::string &path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a nonempty array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = as_double(j[i], path);
  }
  return v;
}

Eigen::MatrixXd as_matrix(const json &j, const std::string &path) {
  if (!j.is_array() || j.empty()) fail(path, "must be a nonempty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) fail(path, "rows must be nonempty arrays");
  Eigen::MatrixXd m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(path, "rows must all have the same width");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_double(j[r][c], path);
    }
  }
  return m;
}

ModelKind parse_model_kind(const json &j, const std::string &path) {
  const std::string kind = as_string(j, path);
  if (kind == "sir") return ModelKind::sir;
  if (kind == "seir") return ModelKind::seir;
  fail(path, "must be \"sir\" or \"seir\"");
}

ParamKind parse_param_kind(const json &j, const std::string &path) {
  const std::string name = as_string(j, path);
  if (name == "beta") return ParamKind::beta;
  if (name == "gamma") return ParamKind::gamma;
  if (name == "alpha") return ParamKind::alpha;
  if (name == "p_obs") return ParamKind::p_obs;
  fail(path, "must be one of \"beta\", \"gamma\", \"alpha\", \"p_obs\"");
}

void parse_model(const json &j, ScenarioConfig &config) {
  check_keys(j, "model", {"kind", "population", "init"});
  config.model_kind = parse_model_kind(need(j, "model", "kind"), "model.kind");
  config.population = as_integer(need(j, "model", "population"),
                                 "model.population");
  if (config.population < 1) fail("model.population", "must be positive");

  const ModelSpec spec = config.spec();
  const json &init = need(j, "model", "init");
  if (!init.is_object()) fail("model.init", "must be an object");
  config.init = StateVector{};
  for (auto it = init.begin(); it != init.end(); ++it) {
    const int c = compartment_index(spec, it.key());
    if (c < 0) fail("model.init", "unknown compartment \"" + it.key() + "\"");
    config.init[c] = as_integer(*it, "model.init." + it.key());
  }
  try {
    validate_state(spec, config.init);
  } catch (const Error &e) {
    fail("model.init", e.what());
  }
}

void parse_truth(const json &j, ScenarioConfig &config) {
  check_keys(j, "truth", {"beta", "gamma", "alpha", "p_obs"});
  const double beta = as_double(need(j, "truth", "beta"), "truth.beta");
  const double gamma = as_double(need(j, "truth", "gamma"), "truth.gamma");
  std::optional<double> alpha;
  std::optional<double> p_obs;
  if (const json *p = find(j, "alpha")) alpha = as_double(*p, "truth.alpha");
  if (const json *p = find(j, "p_obs")) p_obs = as_double(*p, "truth.p_obs");
  try {
    config.truth = Params(beta, gamma, alpha, p_obs);
    validate_params(config.spec(), config.truth);
  } catch (const Error &e) {
    fail("truth", e.what());
  }
}

void parse_data(const json &j, ScenarioConfig &config) {
  check_keys(j, "data", {"source", "t0", "t_end", "dt", "ode_dt"});
  const std::string source = as_string(need(j, "data", "source"), "data.source");
  if (source == "deterministic") {
    config.data.source = DataConfig::Source::deterministic;
  } else if (source == "stochastic") {
    config.data.source = DataConfig::Source::stochastic;
  } else {
    fail("data.source", "must be \"deterministic\" or \"stochastic\"");
  }
  if (const json *p = find(j, "t0")) config.data.t0 = as_double(*p, "data.t0");
  config.data.t_end = as_double(need(j, "data", "t_end"), "data.t_end");
  if (const json *p = find(j, "dt")) config.data.dt = as_double(*p, "data.dt");
  if (const json *p = find(j, "ode_dt")) {
    config.data.ode_dt = as_double(*p, "data.ode_dt");
  }
  if (!(std::isfinite(config.data.dt) && config.data.dt > 0.0)) {
    fail("data.dt", "must be positive");
  }
  if (!(std::isfinite(config.data.ode_dt) && config.data.ode_dt > 0.0)) {
    fail("data.ode_dt", "must be positive");
  }
}

void parse_observation(const json &j, ScenarioConfig &config) {
  check_keys(j, "observation",
             {"kind", "n_ratio", "variance_floor", "observed"});
  const std::string kind = as_string(need(j, "observation", "kind"),
                                     "observation.kind");
  if (kind == "gaussian") {
    config.observation.kind = ObsKind::gaussian;
  } else if (kind == "binomial") {
    config.observation.kind = ObsKind::binomial;
  } else {
    fail("observation.kind", "must be \"gaussian\" or \"binomial\"");
  }
  if (const json *p = find(j, "n_ratio")) {
    config.observation.n_ratio = as_double(*p, "observation.n_ratio");
  }
  if (const json *p = find(j, "variance_floor")) {
    config.observation.variance_floor =
        as_double(*p, "observation.variance_floor");
  }
  if (config.observation.kind == ObsKind::binomial) {
    // The generating detection probability is truth.p_obs; a separate copy
    // here could silently disagree with it.
    if (!config.truth.p_obs) {
      fail("truth.p_obs", "required for binomial observation");
    }
    config.observation.p_obs = *config.truth.p_obs;
  }
  if (const json *p = find(j, "observed")) {
    if (!p->is_array() || p->empty()) {
      fail("observation.observed", "must be a nonempty array");
    }
    const ModelSpec spec = config.spec();
    config.observation.observed.clear();
    for (const auto &item : *p) {
      const std::string name = as_string(item, "observation.observed");
      const int c = compartment_index(spec, name);
      if (c < 0) {
        fail("observation.observed", "unknown compartment \"" + name + "\"");
      }
      config.observation.observed.push_back(c);
    }
  }
  try {
    validate_observation_model(config.observation, config.spec());
  } catch (const Error &e) {
    fail("observation", e.what());
  }
}

void parse_proposal(const json &j, ProposalConfig &proposal) {
  check_keys(j, "inference.proposal",
             {"mode", "h", "sigma", "adapt_t0", "adapt_epsilon", "pilot_steps",
              "pilot_warmup"});
  const std::string mode = as_string(need(j, "inference.proposal", "mode"),
                                     "inference.proposal.mode");
  if (mode == "pilot") {
    proposal.mode = ProposalConfig::Mode::pilot;
  } else if (mode == "adaptive") {
    proposal.mode = ProposalConfig::Mode::adaptive;
  } else if (mode == "fixed") {
    proposal.mode = ProposalConfig::Mode::fixed;
  } else {
    fail("inference.proposal.mode",
         "must be \"pilot\", \"adaptive\" or \"fixed\"");
  }
  if (const json *p = find(j, "h")) {
    proposal.h = as_double(*p, "inference.proposal.h");
    if (!(std::isfinite(*proposal.h) && *proposal.h > 0.0)) {
      fail("inference.proposal.h", "must be positive");
    }
  }
  if (const json *p = find(j, "sigma")) {
    proposal.sigma = as_matrix(*p, "inference.proposal.sigma");
  }
  if (const json *p = find(j, "adapt_t0")) {
    proposal.adapt_t0 = static_cast<int>(
        as_integer(*p, "inference.proposal.adapt_t0"));
    if (proposal.adapt_t0 < 2) {
      fail("inference.proposal.adapt_t0", "must be at least 2");
    }
  }
  if (const json *p = find(j, "adapt_epsilon")) {
    proposal.adapt_epsilon = as_double(*p, "inference.proposal.adapt_epsilon");
    if (!(proposal.adapt_epsilon > 0.0)) {
      fail("inference.proposal.adapt_epsilon", "must be positive");
    }
  }
  if (const json *p = find(j, "pilot_steps")) {
    proposal.pilot_steps = static_cast<int>(
        as_integer(*p, "inference.proposal.pilot_steps"));
    if (proposal.pilot_steps < 2) {
      fail("inference.proposal.pilot_steps", "must be at least 2");
    }
  }
  if (const json *p = find(j, "pilot_warmup")) {
    proposal.pilot_warmup = static_cast<int>(
        as_integer(*p, "inference.proposal.pilot_warmup"));
  }
  if (proposal.pilot_warmup < 0 || proposal.pilot_warmup >= proposal.pilot_steps) {
    fail("inference.proposal.pilot_warmup",
         "must be nonnegative and shorter than pilot_steps");
  }
}

void parse_inference(const json &j, ScenarioConfig &config) {
  check_keys(j, "inference",
             {"method", "parameters", "prior", "initial", "chains", "steps",
              "particles", "burn", "thin", "proposal", "epsilon", "accept",
              "max_attempts"});
  InferenceConfig &inf = config.inference;

  const std::string method = as_string(need(j, "inference", "method"),
                                       "inference.method");
  if (method == "pmmh") {
    inf.method = Method::pmmh;
  } else if (method == "abc") {
    inf.method = Method::abc;
  } else {
    fail("inference.method", "must be \"pmmh\" or \"abc\"");
  }

  const json &params = need(j, "inference", "parameters");
  if (!params.is_array() || params.empty()) {
    fail("inference.parameters", "must be a nonempty array");
  }
  inf.parameters.clear();
  for (const auto &item : params) {
    inf.parameters.push_back(parse_param_kind(item, "inference.parameters"));
  }
  for (const ParamKind kind : inf.parameters) {
    if (kind == ParamKind::p_obs &&
        config.observation.kind != ObsKind::binomial) {
      fail("inference.parameters",
           "p_obs can only be inferred under a binomial observation");
    }
    if (kind == ParamKind::alpha && config.model_kind != ModelKind::seir) {
      fail("inference.parameters", "alpha exists only in the SEIR model");
    }
  }

  const json &prior = need(j, "inference", "prior");
  check_keys(prior, "inference.prior", {"lower", "upper"});
  inf.prior_lower = as_vector(need(prior, "inference.prior", "lower"),
                              "inference.prior.lower");
  inf.prior_upper = as_vector(need(prior, "inference.prior", "upper"),
                              "inference.prior.upper");
  const auto d = static_cast<Eigen::Index>(inf.parameters.size());
  if (inf.prior_lower.size() != d || inf.prior_upper.size() != d) {
    fail("inference.prior", "bounds must match the parameter count");
  }

  if (const json *p = find(j, "initial")) {
    inf.initial = as_vector(*p, "inference.initial");
    if (inf.initial->size() != d) {
      fail("inference.initial", "must match the parameter count");
    }
  }
  if (const json *p = find(j, "chains")) {
    inf.chains = static_cast<int>(as_integer(*p, "inference.chains"));
    if (inf.chains < 1) fail("inference.chains", "must be at least 1");
  }
  if (inf.method == Method::pmmh) {
    inf.steps = static_cast<int>(
        as_integer(need(j, "inference", "steps"), "inference.steps"));
    if (inf.steps < 1) fail("inference.steps", "must be at least 1");
  } else if (find(j, "steps")) {
    fail("inference.steps", "not meaningful for the rejection sampler");
  }
  if (const json *p = find(j, "particles")) {
    inf.particles = static_cast<int>(as_integer(*p, "inference.particles"));
    if (inf.particles < 1) fail("inference.particles", "must be at least 1");
  }
  if (const json *p = find(j, "burn")) {
    inf.burn = as_integer(*p, "inference.burn");
    if (inf.burn < 0 || (inf.method == Method::pmmh && inf.burn > inf.steps)) {
      fail("inference.burn", "must be nonnegative and at most steps");
    }
  }
  if (const json *p = find(j, "thin")) {
    inf.thin = as_integer(*p, "inference.thin");
    if (inf.thin < 1) fail("inference.thin", "must be at least 1");
  }
  if (const json *p = find(j, "proposal")) {
    parse_proposal(*p, inf.proposal);
  }
  if (const json *p = find(j, "epsilon")) {
    inf.epsilon = as_double(*p, "inference.epsilon");
    if (!(inf.epsilon >= 0.0)) fail("inference.epsilon", "must be nonnegative");
  }
  if (const json *p = find(j, "accept")) {
    inf.accept = static_cast<int>(as_integer(*p, "inference.accept"));
    if (inf.accept < 1) fail("inference.accept", "must be at least 1");
  }
  if (const json *p = find(j, "max_attempts")) {
    inf.max_attempts = as_integer(*p, "inference.max_attempts");
  }
  if (inf.max_attempts < inf.accept) {
    fail("inference.max_attempts", "must be at least the accept target");
  }

  if (inf.proposal.sigma &&
      (inf.proposal.sigma->rows() != d || inf.proposal.sigma->cols() != d)) {
    fail("inference.proposal.sigma", "must match the parameter count");
  }

  try {
    validate_parameter_space(config.parameter_space());
    (void)config.prior();
  } catch (const Error &e) {
    fail("inference", e.what());
  }
  if (inf.method == Method::pmmh || inf.initial) {
    try {
      const Eigen::VectorXd theta0 = config.initial_theta();
      if (!config.prior().contains(theta0) ||
          !config.parameter_space().in_domain(theta0)) {
        fail("inference.initial",
             "must lie inside the prior support and the likelihood domain");
      }
    } catch (const Error &e) {
      fail("inference.initial", e.what());
    }
  }
}

void parse_sweep(const json &j, ScenarioConfig &config) {
  check_keys(j, "sweep", {"parameter", "values"});
  config.sweep_parameter = as_string(need(j, "sweep", "parameter"),
                                     "sweep.parameter");
  const json &values = need(j, "sweep", "values");
  if (!values.is_array() || values.empty()) {
    fail("sweep.values", "must be a nonempty array");
  }
  config.sweep_values.clear();
  for (const auto &item : values) {
    config.sweep_values.push_back(as_double(item, "sweep.values"));
  }
  // Dry run every value so a broken sweep fails at load time.
  for (const double v : config.sweep_values) {
    try {
      (void)with_sweep_value(config, v);
    } catch (const Error &e) {
      fail("sweep.values", e.what());
    }
  }
}

}  // namespace

ModelSpec ScenarioConfig::spec() const {
  return model_kind == ModelKind::sir ? sir_spec(population)
                                      : seir_spec(population);
}

std::vector<double> ScenarioConfig::sample_grid() const {
  const double span = data.t_end - data.t0;
  const auto n = static_cast<std::int64_t>(std::llround(span / data.dt));
  if (n < 1 ||
      std::abs(data.t0 + static_cast<double>(n) * data.dt - data.t_end) >
          1e-9 * std::max(1.0, std::abs(data.t_end))) {
    throw Error(Errc::config,
                "data window (t0, t_end) must be a whole number of dt steps");
  }
  std::vector<double> grid(static_cast<std::size_t>(n) + 1);
  for (std::int64_t k = 0; k <= n; ++k) {
    grid[static_cast<std::size_t>(k)] =
        data.t0 + static_cast<double>(k) * data.dt;
  }
  grid.back() = data.t_end;
  return grid;
}

std::vector<double> ScenarioConfig::observation_times() const {
  auto grid = sample_grid();
  grid.erase(grid.begin());
  return grid;
}

ParameterSpace ScenarioConfig::parameter_space() const {
  ParameterSpace space;
  space.kinds = inference.parameters;
  space.base = Params(truth.beta, truth.gamma, truth.alpha, std::nullopt);
  return space;
}

Prior ScenarioConfig::prior() const {
  return Prior::uniform_box(inference.prior_lower, inference.prior_upper);
}

Eigen::VectorXd ScenarioConfig::initial_theta() const {
  if (inference.initial) return *inference.initial;
  Eigen::VectorXd mid(inference.prior_lower.size());
  for (Eigen::Index i = 0; i < mid.size(); ++i) {
    if (!std::isfinite(inference.prior_upper[i])) {
      throw Error(Errc::config,
                  "an unbounded prior needs an explicit initial point");
    }
    mid[i] = 0.5 * (inference.prior_lower[i] + inference.prior_upper[i]);
  }
  return mid;
}

std::vector<std::string> ScenarioConfig::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(inference.parameters.size());
  for (const ParamKind kind : inference.parameters) {
    names.emplace_back(param_kind_name(kind));
  }
  return names;
}

ScenarioConfig parse_scenario(const std::string &json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception &e) {
    throw Error(Errc::config, std::string("invalid JSON: ") + e.what());
  }
  check_keys(doc, "scenario",
             {"schema", "name", "model", "truth", "data", "observation",
              "inference", "sweep"});

  ScenarioConfig config;
  config.schema = static_cast<int>(
      as_integer(need(doc, "scenario", "schema"), "schema"));
  if (config.schema != 1) fail("schema", "unsupported schema version");
  config.name = as_string(need(doc, "scenario", "name"), "name");
  if (config.name.empty()) fail("name", "must be nonempty");

  parse_model(need(doc, "scenario", "model"), config);
  parse_truth(need(doc, "scenario", "truth"), config);
  parse_data(need(doc, "scenario", "data"), config);
  parse_observation(need(doc, "scenario", "observation"), config);
  try {
    (void)config.sample_grid();
  } catch (const Error &e) {
    fail("data", e.what());
  }
  parse_inference(need(doc, "scenario", "inference"), config);
  if (const json *p = find(doc, "sweep")) parse_sweep(*p, config);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open scenario: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_scenario(buffer.str());
  } catch (const Error &e) {
    if (e.code() == Errc::config) {
      throw Error(Errc::config, path.string() + ": " + e.what());
    }
    throw;
  }
}

ScenarioConfig with_sweep_value(const ScenarioConfig &config, double value) {
  ScenarioConfig out = config;
  out.sweep_parameter.reset();
  out.sweep_values.clear();
  const std::string &param = config.sweep_parameter
                                 ? *config.sweep_parameter
                                 : throw Error(Errc::config,
                                               "scenario has no sweep");
  if (param == "observation.n_ratio") {
    if (out.observation.kind != ObsKind::gaussian) {
      throw Error(Errc::config, "n_ratio sweep needs a gaussian observation");
    }
    out.observation.n_ratio = value;
  } else if (param == "observation.p_obs") {
    if (out.observation.kind != ObsKind::binomial) {
      throw Error(Errc::config, "p_obs sweep needs a binomial observation");
    }
    out.truth = Params(out.truth.beta, out.truth.gamma, out.truth.alpha, value);
    out.observation.p_obs = value;
  } else if (param == "data.t_end") {
    out.data.t_end = value;
  } else {
    throw Error(Errc::config, "unsupported sweep parameter \"" + param + "\"");
  }
  try {
    validate_observation_model(out.observation, out.spec());
    (void)out.sample_grid();
  } catch (const Error &e) {
    throw Error(Errc::config,
                "sweep value " + sweep_label(value) + ": " + e.what());
  }
  return out;
}

std::string sweep_label(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "value_%g", value);
  return buf;
}

}  // namespace epinfer
