// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epinfer/errors.hpp"
#include "epinfer/gillespie.hpp"

namespace epinfer {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

Eigen::MatrixXd burn_thin(const Eigen::MatrixXd &samples, std::int64_t burn,
                          std::int64_t thin) {
  require(burn >= 0 && burn < samples.rows(),
          "burn-in must be shorter than the chain");
  require(thin >= 1, "thinning stride must be at least one");
  const std::int64_t kept = (samples.rows() - burn - 1) / thin + 1;
  Eigen::MatrixXd out(kept, samples.cols());
  for (std::int64_t r = 0; r < kept; ++r) {
    out.row(r) = samples.row(burn + r * thin);
  }
  return out;
}

double gelman_rubin(const std::vector<Eigen::VectorXd> &chains) {
  const auto m = static_cast<std::int64_t>(chains.size());
  require(m >= 2, "scale reduction needs at least two chains");
  const std::int64_t n = chains.front().size();
  require(n >= 2, "scale reduction needs chains of length at least two");
  for (const auto &chain : chains) {
    require(chain.size() == n, "chains must have equal length");
  }

  Eigen::VectorXd means(m);
  Eigen::VectorXd vars(m);
  for (std::int64_t c = 0; c < m; ++c) {
    const auto &x = chains[static_cast<std::size_t>(c)];
    means[c] = x.mean();
    vars[c] = (x.array() - means[c]).square().sum() /
              static_cast<double>(n - 1);
  }
  const double grand = means.mean();
  const double b = static_cast<double>(n) *
                   (means.array() - grand).square().sum() /
                   static_cast<double>(m - 1);
  const double w = vars.mean();
  if (w <= 0.0) {
    return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  }
  const double dn = static_cast<double>(n);
  return std::sqrt(((dn - 1.0) / dn * w + b / dn) / w);
}

double effective_sample_size(const Eigen::VectorXd &chain) {
  const std::int64_t n = chain.size();
  require(n >= 2, "effective sample size needs at least two samples");
  const double dn = static_cast<double>(n);
  const double mean = chain.mean();
  const Eigen::ArrayXd centered = chain.array() - mean;

  const double gamma0 = centered.square().sum() / dn;
  if (gamma0 <= 0.0) return dn;  // constant chain carries its full length

  const auto autocov = [&](std::int64_t lag) {
    double acc = 0.0;
    for (std::int64_t t = 0; t + lag < n; ++t) acc += centered[t] * centered[t + lag];
    return acc / dn;
  };

  double tau = -1.0;
  for (std::int64_t m = 0; 2 * m + 1 < n; ++m) {
    const double pair_sum = (autocov(2 * m) + autocov(2 * m + 1)) / gamma0;
    if (pair_sum <= 0.0) break;
    tau += 2.0 * pair_sum;
  }
  if (!(tau > 0.0)) return dn;
  return std::min(dn, dn / tau);
}

std::pair<double, double> hpd_interval(std::span<const double> samples,
                                       double mass) {
  require(!samples.empty(), "interval needs at least one sample");
  require(mass > 0.0 && mass <= 1.0, "mass must lie in (0, 1]");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<std::int64_t>(sorted.size());
  const auto window = static_cast<std::int64_t>(
      std::ceil(mass * static_cast<double>(n) - 1e-12));
  const std::int64_t w = std::max<std::int64_t>(window, 1);

  std::int64_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i + w <= n; ++i) {
    const double width = sorted[static_cast<std::size_t>(i + w - 1)] -
                         sorted[static_cast<std::size_t>(i)];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {sorted[static_cast<std::size_t>(best)],
          sorted[static_cast<std::size_t>(best + w - 1)]};
}

double pmse(double truth, std::span<const double> samples) {
  require(!samples.empty(), "mean squared error needs at least one sample");
  require(std::isfinite(truth), "truth must be finite");
  double acc = 0.0;
  for (const double s : samples) {
    const double d = truth - s;
    acc += d * d;
  }
  return acc / static_cast<double>(samples.size());
}

double quantile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), "quantile needs at least one sample");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

TrajectoryBands trajectory_bands(const ModelSpec &spec,
                                 const ParameterSpace &space,
                                 const Eigen::MatrixXd &samples,
                                 const StateVector &init, double t0,
                                 std::span<const double> t_grid, int n_draws,
                                 const RngStream &stream) {
  validate_parameter_space(space);
  require(samples.rows() >= 1, "need at least one posterior sample");
  require(samples.cols() == space.dim(),
          "sample width must match the parameter space");
  require(n_draws >= 1, "need at least one predictive draw");
  require(!t_grid.empty(), "time grid must be nonempty");

  const auto n_times = t_grid.size();
  const auto n_comp = static_cast<std::size_t>(spec.n_compartments);
  // draws[c][k][j]: compartment c at grid index k for predictive draw j.
  std::vector<std::vector<std::vector<double>>> draws(
      n_comp, std::vector<std::vector<double>>(
                  n_times, std::vector<double>(
                               static_cast<std::size_t>(n_draws))));

  for (int j = 0; j < n_draws; ++j) {
    auto engine = stream.child("bands", static_cast<std::uint64_t>(j)).engine();
    const auto row = engine.uniform_index(
        static_cast<std::uint64_t>(samples.rows()));
    const Eigen::VectorXd theta = samples.row(static_cast<Eigen::Index>(row));
    require(space.in_domain(theta),
            "posterior sample outside the likelihood domain");
    const Trajectory sim = gillespie_run_grid(
        spec, space.to_params(theta), init, t0, t_grid, engine);
    for (std::size_t c = 0; c < n_comp; ++c) {
      for (std::size_t k = 0; k < n_times; ++k) {
        draws[c][k][static_cast<std::size_t>(j)] =
            static_cast<double>(sim.states[k][c]);
      }
    }
  }

  TrajectoryBands bands;
  bands.times.assign(t_grid.begin(), t_grid.end());
  bands.lower.assign(n_comp, std::vector<double>(n_times));
  bands.median.assign(n_comp, std::vector<double>(n_times));
  bands.upper.assign(n_comp, std::vector<double>(n_times));
  for (std::size_t c = 0; c < n_comp; ++c) {
    for (std::size_t k = 0; k < n_times; ++k) {
      auto &column = draws[c][k];
      std::sort(column.begin(), column.end());
      bands.lower[c][k] = quantile_sorted(column, 0.025);
      bands.median[c][k] = quantile_sorted(column, 0.5);
      bands.upper[c][k] = quantile_sorted(column, 0.975);
    }
  }
  return bands;
}

PosteriorSummary summarize_posterior(const std::vector<Eigen::MatrixXd> &chains,
                                     const std::vector<std::string> &names,
                                     double hpd_mass) {
  require(!chains.empty(), "summary needs at least one chain");
  const auto d = chains.front().cols();
  const auto n = chains.front().rows();
  require(n >= 2, "summary needs chains of length at least two");
  require(static_cast<Eigen::Index>(names.size()) == d,
          "one name per parameter required");
  for (const auto &chain : chains) {
    require(chain.cols() == d && chain.rows() == n,
            "chains must have equal shape");
  }

  PosteriorSummary out;
  out.names = names;
  out.hpd_mass = hpd_mass;
  const auto m = chains.size();
  const auto pooled_n = static_cast<std::size_t>(n) * m;

  for (Eigen::Index p = 0; p < d; ++p) {
    std::vector<double> pooled;
    pooled.reserve(pooled_n);
    std::vector<Eigen::VectorXd> scalar_chains;
    scalar_chains.reserve(m);
    double ess_total = 0.0;
    for (const auto &chain : chains) {
      const Eigen::VectorXd col = chain.col(p);
      scalar_chains.push_back(col);
      ess_total += effective_sample_size(col);
      pooled.insert(pooled.end(), col.data(), col.data() + col.size());
    }

    double mean = 0.0;
    for (const double v : pooled) mean += v;
    mean /= static_cast<double>(pooled.size());
    double ss = 0.0;
    for (const double v : pooled) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(pooled.size() - 1));

    out.mean.push_back(mean);
    out.sd.push_back(sd);
    out.hpd.push_back(hpd_interval(pooled, hpd_mass));
    out.ess.push_back(ess_total);
    out.rhat.push_back(m >= 2 ? gelman_rubin(scalar_chains) : kNaN);
  }
  return out;
}

}  // namespace epinfer
