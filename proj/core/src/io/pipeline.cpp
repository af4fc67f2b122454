// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/io/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "epinfer/abc.hpp"
#include "epinfer/errors.hpp"
#include "epinfer/gillespie.hpp"
#include "epinfer/io/csv.hpp"
#include "epinfer/parallel.hpp"
#include "epinfer/pmmh.hpp"

namespace epinfer {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr int kBandDraws = 500;

void ensure_dir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    throw Error(Errc::io, "cannot create directory " + dir.string() + ": " +
                              ec.message());
  }
}

void write_json(const fs::path &path, const ordered_json &doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(Errc::io, "cannot open for writing: " + path.string());
  }
  out << doc.dump(2) << '\n';
  out.flush();
  if (!out) {
    throw Error(Errc::io, "write failed: " + path.string());
  }
}

ordered_json read_json(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(Errc::io, "cannot open for reading: " + path.string());
  }
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw Error(Errc::io, "invalid JSON in " + path.string() + ": " + e.what());
  }
}

ordered_json matrix_to_json(const Eigen::MatrixXd &m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

fs::path chain_path(const fs::path &dir, int index) {
  return dir / ("chain_" + std::to_string(index) + ".csv");
}

void write_chain_csv(const fs::path &path, const Chain &chain,
                     const std::vector<std::string> &names) {
  CsvTable table;
  table.header.push_back("step");
  table.header.insert(table.header.end(), names.begin(), names.end());
  table.header.push_back("log_target");
  table.header.push_back("log_likelihood");
  const auto rows = chain.samples.rows();
  table.rows.reserve(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    std::vector<double> row;
    row.reserve(table.header.size());
    row.push_back(static_cast<double>(r));
    for (Eigen::Index c = 0; c < chain.samples.cols(); ++c) {
      row.push_back(chain.samples(r, c));
    }
    row.push_back(chain.log_target[static_cast<std::size_t>(r)]);
    row.push_back(chain.log_likelihood[static_cast<std::size_t>(r)]);
    table.rows.push_back(std::move(row));
  }
  write_csv(path, table);
}

}  // namespace

ObservedSeries read_observed_series(const fs::path &path,
                                    const ModelSpec &spec) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "t") {
    throw Error(Errc::io, path.string() +
                              ": expected a \"t\" column followed by "
                              "compartment columns");
  }
  ObservedSeries series;
  for (std::size_t i = 1; i < table.header.size(); ++i) {
    const int c = compartment_index(spec, table.header[i]);
    if (c < 0) {
      throw Error(Errc::io, path.string() + ": unknown compartment column \"" +
                                table.header[i] + "\"");
    }
    series.compartments.push_back(c);
  }
  series.times.reserve(table.rows.size());
  series.values.reserve(table.rows.size());
  for (const auto &row : table.rows) {
    series.times.push_back(row[0]);
    series.values.emplace_back(row.begin() + 1, row.end());
  }
  try {
    validate_observed_series(series, spec);
  } catch (const Error &e) {
    throw Error(Errc::io, path.string() + ": " + e.what());
  }
  return series;
}

void run_simulate(const ScenarioConfig &config, std::uint64_t seed,
                  const fs::path &out_dir) {
  ensure_dir(out_dir);
  const ModelSpec spec = config.spec();
  const auto grid = config.sample_grid();

  CsvTable table;
  table.header.push_back("t");
  for (int c = 0; c < spec.n_compartments; ++c) {
    table.header.emplace_back(spec.compartment_names[c]);
  }
  table.rows.reserve(grid.size());

  if (config.data.source == DataConfig::Source::deterministic) {
    const RealTrajectory path = integrate_deterministic(
        spec, config.truth, config.init, grid, config.data.ode_dt);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<double> row{path.times[k]};
      for (int c = 0; c < spec.n_compartments; ++c) {
        row.push_back(path.states[k][c]);
      }
      table.rows.push_back(std::move(row));
    }
  } else {
    auto engine = RngStream(seed).child("simulate").engine();
    const Trajectory path = gillespie_run_grid(spec, config.truth, config.init,
                                               config.data.t0, grid, engine);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      std::vector<double> row{path.times[k]};
      for (int c = 0; c < spec.n_compartments; ++c) {
        row.push_back(static_cast<double>(path.states[k][c]));
      }
      table.rows.push_back(std::move(row));
    }
  }
  write_csv(out_dir / "hidden.csv", table);
}

void run_observe(const ScenarioConfig &config, std::uint64_t seed,
                 const fs::path &out_dir) {
  const ModelSpec spec = config.spec();
  const fs::path hidden_path = out_dir / "hidden.csv";
  const CsvTable hidden = read_csv(hidden_path);
  if (hidden.header.size() !=
          static_cast<std::size_t>(spec.n_compartments) + 1 ||
      hidden.header[0] != "t") {
    throw Error(Errc::io, hidden_path.string() +
                              ": header must be t plus the model compartments");
  }
  for (int c = 0; c < spec.n_compartments; ++c) {
    if (hidden.header[static_cast<std::size_t>(c) + 1] !=
        spec.compartment_names[c]) {
      throw Error(Errc::io, hidden_path.string() +
                                ": compartment columns must follow model order");
    }
  }

  std::vector<double> times;
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < hidden.rows.size(); ++r) {
    if (hidden.rows[r][0] > config.data.t0) {
      times.push_back(hidden.rows[r][0]);
      kept.push_back(r);
    }
  }
  if (kept.empty()) {
    throw Error(Errc::io, hidden_path.string() +
                              ": no rows after the initial time to observe");
  }

  auto engine = RngStream(seed).child("observe").engine();
  ObservedSeries series;
  if (config.data.source == DataConfig::Source::deterministic) {
    RealTrajectory path;
    path.times = times;
    for (const std::size_t r : kept) {
      RealState state{};
      for (int c = 0; c < spec.n_compartments; ++c) {
        state[c] = hidden.rows[r][static_cast<std::size_t>(c) + 1];
      }
      path.states.push_back(state);
    }
    series = simulate_observation(spec, config.observation, path, engine);
  } else {
    Trajectory path;
    path.times = times;
    for (const std::size_t r : kept) {
      StateVector state{};
      for (int c = 0; c < spec.n_compartments; ++c) {
        state[c] = std::llround(hidden.rows[r][static_cast<std::size_t>(c) + 1]);
      }
      path.states.push_back(state);
    }
    series = simulate_observation(spec, config.observation, path, engine);
  }

  CsvTable table;
  table.header.push_back("t");
  for (const int c : series.compartments) {
    table.header.emplace_back(spec.compartment_names[c]);
  }
  table.rows.reserve(series.times.size());
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::vector<double> row{series.times[k]};
    row.insert(row.end(), series.values[k].begin(), series.values[k].end());
    table.rows.push_back(std::move(row));
  }
  write_csv(out_dir / "observed.csv", table);
}

FitInfo run_fit(const ScenarioConfig &config, std::uint64_t seed,
                const fs::path &out_dir, std::optional<int> chains_override,
                int threads) {
  ensure_dir(out_dir);
  const ModelSpec spec = config.spec();
  const ObservedSeries series =
      read_observed_series(out_dir / "observed.csv", spec);
  const ParameterSpace space = config.parameter_space();
  const Prior prior = config.prior();
  const auto names = config.parameter_names();
  const RngStream master(seed);
  const InferenceConfig &inf = config.inference;

  FitInfo info;
  info.method = inf.method;

  if (inf.method == Method::abc) {
    AbcOptions options;
    options.n_accept = inf.accept;
    options.epsilon = inf.epsilon;
    options.max_attempts = inf.max_attempts;
    const AbcResult result =
        abc_rejection(spec, space, prior, series, config.init, config.data.t0,
                      options, master.child("abc"));

    CsvTable table;
    table.header.push_back("step");
    table.header.insert(table.header.end(), names.begin(), names.end());
    table.header.push_back("distance");
    table.header.push_back("attempt");
    for (Eigen::Index r = 0; r < result.samples.rows(); ++r) {
      std::vector<double> row{static_cast<double>(r)};
      for (Eigen::Index c = 0; c < result.samples.cols(); ++c) {
        row.push_back(result.samples(r, c));
      }
      row.push_back(result.distances[static_cast<std::size_t>(r)]);
      row.push_back(
          static_cast<double>(result.attempt[static_cast<std::size_t>(r)]));
      table.rows.push_back(std::move(row));
    }
    write_csv(chain_path(out_dir, 0), table);

    info.attempts = result.attempts;
    info.accepted = result.samples.rows();
    info.rate = static_cast<double>(info.accepted) /
                static_cast<double>(info.attempts);

    ordered_json doc;
    doc["schema"] = 1;
    doc["scenario"] = config.name;
    doc["method"] = "abc";
    doc["seed"] = seed;
    doc["epsilon"] = inf.epsilon;
    doc["accepted"] = info.accepted;
    doc["attempts"] = info.attempts;
    doc["rate"] = info.rate;
    write_json(out_dir / "fit.json", doc);
    return info;
  }

  const int n_chains = chains_override.value_or(inf.chains);
  if (n_chains < 1) {
    throw Error(Errc::invalid_argument, "need at least one chain");
  }
  FilterOptions filter;
  filter.n_particles = inf.particles;
  filter.n_threads = std::max(1, threads / n_chains);
  const Eigen::VectorXd theta0 = config.initial_theta();

  std::vector<Chain> chains(static_cast<std::size_t>(n_chains));
  info.chains.resize(static_cast<std::size_t>(n_chains));

  parallel_for(n_chains, threads, [&](int c) {
    const RngStream chain_stream =
        master.child("chain", static_cast<std::uint64_t>(c));
    ChainFitInfo ci;
    ci.steps = inf.steps;

    PmmhOptions options;
    options.n_steps = inf.steps;
    options.filter = filter;

    Eigen::VectorXd start = theta0;
    switch (inf.proposal.mode) {
      case ProposalConfig::Mode::pilot: {
        PilotOptions pilot;
        pilot.probe_steps = inf.proposal.pilot_steps;
        pilot.warmup = inf.proposal.pilot_warmup;
        pilot.filter = filter;
        const PilotResult tuned =
            pilot_tune(spec, space, prior, config.observation, series,
                       config.init, config.data.t0, theta0, pilot,
                       chain_stream);
        options.proposal.mode = Proposal::Mode::fixed;
        options.proposal.h = tuned.h;
        options.proposal.sigma = tuned.sigma;
        start = tuned.theta;
        ci.proposal_mode = "pilot";
        ci.h = tuned.h;
        ci.pilot_adjustments = tuned.adjustments;
        ci.sigma = tuned.sigma;
        break;
      }
      case ProposalConfig::Mode::fixed: {
        options.proposal.mode = Proposal::Mode::fixed;
        options.proposal.h = inf.proposal.h;
        if (inf.proposal.sigma) options.proposal.sigma = *inf.proposal.sigma;
        ci.proposal_mode = "fixed";
        ci.h = inf.proposal.h ? *inf.proposal.h
                              : default_proposal_scale(space.dim());
        ci.sigma = inf.proposal.sigma
                       ? *inf.proposal.sigma
                       : Eigen::MatrixXd::Identity(space.dim(), space.dim());
        break;
      }
      case ProposalConfig::Mode::adaptive: {
        options.proposal.mode = Proposal::Mode::adaptive;
        options.proposal.h = inf.proposal.h;
        options.proposal.adapt_t0 = inf.proposal.adapt_t0;
        options.proposal.adapt_epsilon = inf.proposal.adapt_epsilon;
        ci.proposal_mode = "adaptive";
        ci.h = inf.proposal.h ? *inf.proposal.h
                              : default_proposal_scale(space.dim());
        break;
      }
    }

    chains[static_cast<std::size_t>(c)] =
        pmmh_run(spec, space, prior, config.observation, series, config.init,
                 config.data.t0, start, options, chain_stream.child("main"));
    const Chain &chain = chains[static_cast<std::size_t>(c)];
    ci.accepted = chain.accepted;
    ci.bound_rejects = chain.bound_rejects;
    ci.filter_failures = chain.filter_failures;
    ci.acceptance = chain.acceptance_rate();
    info.chains[static_cast<std::size_t>(c)] = std::move(ci);
  });

  for (int c = 0; c < n_chains; ++c) {
    write_chain_csv(chain_path(out_dir, c), chains[static_cast<std::size_t>(c)],
                    names);
  }

  ordered_json doc;
  doc["schema"] = 1;
  doc["scenario"] = config.name;
  doc["method"] = "pmmh";
  doc["seed"] = seed;
  doc["particles"] = inf.particles;
  ordered_json chain_docs = ordered_json::array();
  for (int c = 0; c < n_chains; ++c) {
    const ChainFitInfo &ci = info.chains[static_cast<std::size_t>(c)];
    ordered_json entry;
    entry["index"] = c;
    entry["proposal"] = ci.proposal_mode;
    entry["h"] = ci.h;
    if (ci.pilot_adjustments >= 0) {
      entry["pilot_adjustments"] = ci.pilot_adjustments;
    }
    if (ci.sigma.size() > 0) entry["sigma"] = matrix_to_json(ci.sigma);
    entry["steps"] = ci.steps;
    entry["accepted"] = ci.accepted;
    entry["acceptance"] = ci.acceptance;
    entry["bound_rejects"] = ci.bound_rejects;
    entry["filter_failures"] = ci.filter_failures;
    chain_docs.push_back(std::move(entry));
  }
  doc["chains"] = std::move(chain_docs);
  write_json(out_dir / "fit.json", doc);
  return info;
}

PosteriorSummary run_diagnose(const ScenarioConfig &config, std::uint64_t seed,
                              const fs::path &out_dir) {
  const ModelSpec spec = config.spec();
  const ParameterSpace space = config.parameter_space();
  const auto names = config.parameter_names();
  const auto d = static_cast<Eigen::Index>(names.size());

  std::vector<Eigen::MatrixXd> kept;
  for (int c = 0;; ++c) {
    const fs::path path = chain_path(out_dir, c);
    if (!fs::exists(path)) break;
    const CsvTable table = read_csv(path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(table.rows.size()), d);
    for (Eigen::Index p = 0; p < d; ++p) {
      const int col = table.column(names[static_cast<std::size_t>(p)]);
      if (col < 0) {
        throw Error(Errc::io, path.string() + ": missing column \"" +
                                  names[static_cast<std::size_t>(p)] + "\"");
      }
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        m(static_cast<Eigen::Index>(r), p) =
            table.rows[r][static_cast<std::size_t>(col)];
      }
    }
    kept.push_back(
        burn_thin(m, config.inference.burn, config.inference.thin));
  }
  if (kept.empty()) {
    throw Error(Errc::io, "no chain files in " + out_dir.string() +
                              "; run the fit stage first");
  }

  const PosteriorSummary summary = summarize_posterior(kept, names, 0.95);

  const ordered_json fit_doc = read_json(out_dir / "fit.json");
  std::vector<double> acceptance;
  if (fit_doc.contains("chains")) {
    for (const auto &entry : fit_doc.at("chains")) {
      acceptance.push_back(entry.at("acceptance").get<double>());
    }
  } else if (fit_doc.contains("rate")) {
    acceptance.push_back(fit_doc.at("rate").get<double>());
  }

  Eigen::Index total_rows = 0;
  for (const auto &m : kept) total_rows += m.rows();
  Eigen::MatrixXd pooled(total_rows, d);
  Eigen::Index at = 0;
  for (const auto &m : kept) {
    pooled.middleRows(at, m.rows()) = m;
    at += m.rows();
  }

  const Eigen::VectorXd truth_theta = space.from_params(config.truth);
  const auto grid = config.sample_grid();
  const TrajectoryBands bands =
      trajectory_bands(spec, space, pooled, config.init, config.data.t0, grid,
                       kBandDraws, RngStream(seed).child("diagnose"));

  CsvTable band_table;
  band_table.header.push_back("t");
  for (int c = 0; c < spec.n_compartments; ++c) {
    const std::string base(spec.compartment_names[c]);
    band_table.header.push_back(base + "_lower");
    band_table.header.push_back(base + "_median");
    band_table.header.push_back(base + "_upper");
  }
  for (std::size_t k = 0; k < bands.times.size(); ++k) {
    std::vector<double> row{bands.times[k]};
    for (int c = 0; c < spec.n_compartments; ++c) {
      row.push_back(bands.lower[static_cast<std::size_t>(c)][k]);
      row.push_back(bands.median[static_cast<std::size_t>(c)][k]);
      row.push_back(bands.upper[static_cast<std::size_t>(c)][k]);
    }
    band_table.rows.push_back(std::move(row));
  }
  write_csv(out_dir / "bands.csv", band_table);

  ordered_json doc;
  doc["schema"] = 1;
  doc["scenario"] = config.name;
  doc["method"] = config.inference.method == Method::abc ? "abc" : "pmmh";
  doc["chains"] = kept.size();
  doc["kept_per_chain"] = kept.front().rows();
  doc["burn"] = config.inference.burn;
  doc["thin"] = config.inference.thin;
  doc["acceptance"] = acceptance;
  ordered_json params = ordered_json::array();
  for (std::size_t p = 0; p < names.size(); ++p) {
    const Eigen::VectorXd col = pooled.col(static_cast<Eigen::Index>(p));
    ordered_json entry;
    entry["name"] = names[p];
    entry["truth"] = truth_theta[static_cast<Eigen::Index>(p)];
    entry["mean"] = summary.mean[p];
    entry["sd"] = summary.sd[p];
    entry["hpd_lower"] = summary.hpd[p].first;
    entry["hpd_upper"] = summary.hpd[p].second;
    entry["ess"] = summary.ess[p];
    entry["rhat"] = summary.rhat[p];
    entry["pmse"] = pmse(truth_theta[static_cast<Eigen::Index>(p)],
                         std::span<const double>(col.data(),
                                                 static_cast<std::size_t>(
                                                     col.size())));
    params.push_back(std::move(entry));
  }
  doc["parameters"] = std::move(params);
  write_json(out_dir / "summary.json", doc);
  return summary;
}

void run_reproduce(const ScenarioConfig &config, std::uint64_t seed,
                   const fs::path &out_dir, std::optional<int> chains_override,
                   int threads) {
  if (!config.sweep_parameter) {
    run_simulate(config, seed, out_dir);
    run_observe(config, seed, out_dir);
    run_fit(config, seed, out_dir, chains_override, threads);
    run_diagnose(config, seed, out_dir);
    return;
  }

  ensure_dir(out_dir);
  ordered_json doc;
  doc["schema"] = 1;
  doc["scenario"] = config.name;
  doc["parameter"] = *config.sweep_parameter;
  doc["values"] = config.sweep_values;
  ordered_json results = ordered_json::array();
  for (const double value : config.sweep_values) {
    const std::string label = sweep_label(value);
    const fs::path sub = out_dir / label;
    const ScenarioConfig cfg = with_sweep_value(config, value);
    run_simulate(cfg, seed, sub);
    run_observe(cfg, seed, sub);
    run_fit(cfg, seed, sub, chains_override, threads);
    const PosteriorSummary summary = run_diagnose(cfg, seed, sub);

    ordered_json entry;
    entry["value"] = value;
    entry["label"] = label;
    ordered_json params = ordered_json::array();
    for (std::size_t p = 0; p < summary.names.size(); ++p) {
      ordered_json pe;
      pe["name"] = summary.names[p];
      pe["mean"] = summary.mean[p];
      pe["hpd_lower"] = summary.hpd[p].first;
      pe["hpd_upper"] = summary.hpd[p].second;
      pe["hpd_width"] = summary.hpd[p].second - summary.hpd[p].first;
      pe["ess"] = summary.ess[p];
      pe["rhat"] = summary.rhat[p];
      params.push_back(std::move(pe));
    }
    entry["parameters"] = std::move(params);
    results.push_back(std::move(entry));
  }
  doc["results"] = std::move(results);
  write_json(out_dir / "sweep.json", doc);
}

}  // namespace epinfer
