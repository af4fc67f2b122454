// Apache License, Version 2.0, refer to LICENSE.txt

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "epinfer/errors.hpp"
#include "epinfer/io/pipeline.hpp"
#include "epinfer/io/scenario.hpp"

namespace {

struct CommonArgs {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 1;
  int chains = 0;  // 0 keeps the scenario's chain count
  int threads = 1;
};

void add_common(CLI::App *cmd, CommonArgs &args, bool with_fit_flags) {
  cmd->add_option("--config", args.config, "scenario configuration file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "master seed (default 1)");
  cmd->add_option("--out", args.out, "run directory (default .)");
  if (with_fit_flags) {
    cmd->add_option("--chains", args.chains,
                    "override the scenario's chain count")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--threads", args.threads, "worker threads (default 1)")
        ->check(CLI::PositiveNumber);
  }
}

std::optional<int> chains_override(const CommonArgs &args) {
  if (args.chains > 0) return args.chains;
  return std::nullopt;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{
      "Stochastic epidemic simulation, noisy observation, and posterior "
      "recovery"};
  app.require_subcommand(1);
  CommonArgs args;

  CLI::App *simulate = app.add_subcommand(
      "simulate", "generate the latent epidemic path (hidden.csv)");
  add_common(simulate, args, false);
  CLI::App *observe = app.add_subcommand(
      "observe", "push the latent path through the observation channel "
                 "(observed.csv)");
  add_common(observe, args, false);
  CLI::App *fit = app.add_subcommand(
      "fit", "recover parameters from observed.csv (chain_<c>.csv, fit.json)");
  add_common(fit, args, true);
  CLI::App *diagnose = app.add_subcommand(
      "diagnose", "summarise fitted chains (summary.json, bands.csv)");
  add_common(diagnose, args, false);
  CLI::App *reproduce = app.add_subcommand(
      "reproduce", "run simulate, observe, fit and diagnose in one pass");
  add_common(reproduce, args, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const epinfer::ScenarioConfig config =
        epinfer::load_scenario(args.config);
    if (simulate->parsed()) {
      epinfer::run_simulate(config, args.seed, args.out);
      std::cout << "wrote " << args.out << "/hidden.csv\n";
    } else if (observe->parsed()) {
      epinfer::run_observe(config, args.seed, args.out);
      std::cout << "wrote " << args.out << "/observed.csv\n";
    } else if (fit->parsed()) {
      const epinfer::FitInfo info = epinfer::run_fit(
          config, args.seed, args.out, chains_override(args), args.threads);
      if (info.method == epinfer::Method::abc) {
        std::cout << "accepted " << info.accepted << " draws in "
                  << info.attempts << " attempts (rate " << info.rate
                  << ")\n";
      } else {
        for (std::size_t c = 0; c < info.chains.size(); ++c) {
          std::cout << "chain " << c << ": acceptance "
                    << info.chains[c].acceptance << " (h=" << info.chains[c].h
                    << ")\n";
        }
      }
    } else if (diagnose->parsed()) {
      const epinfer::PosteriorSummary summary =
          epinfer::run_diagnose(config, args.seed, args.out);
      for (std::size_t p = 0; p < summary.names.size(); ++p) {
        std::cout << summary.names[p] << ": mean " << summary.mean[p]
                  << ", 95% HPD [" << summary.hpd[p].first << ", "
                  << summary.hpd[p].second << "]\n";
      }
    } else if (reproduce->parsed()) {
      epinfer::run_reproduce(config, args.seed, args.out,
                             chains_override(args), args.threads);
      std::cout << "reproduced " << config.name << " into " << args.out
                << "\n";
    }
  } catch (const epinfer::Error &e) {
    std::cerr << "error (" << epinfer::errc_name(e.code()) << "): " << e.what()
              << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
