// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_METROPOLIS_HPP
#define EPINFER_METROPOLIS_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "epinfer/model.hpp"
#include "epinfer/rng.hpp"

namespace epinfer {

// Which model parameter each coordinate of the inference vector drives.
enum class ParamKind { beta, gamma, alpha, p_obs };

std::string_view param_kind_name(ParamKind kind) noexcept;

// Mapping between the inference vector theta and full model parameters.
// Components not listed in `kinds` keep their value from `base`.
struct ParameterSpace {
  std::vector<ParamKind> kinds;
  Params base{1.0, 1.0};

  int dim() const noexcept { return static_cast<int>(kinds.size()); }

  // Componentwise domain of the likelihood: rates strictly positive,
  // detection probabilities in (0, 1], everything finite.
  bool in_domain(const Eigen::VectorXd &theta) const noexcept;

  // Requires in_domain(theta).
  Params to_params(const Eigen::VectorXd &theta) const;

  Eigen::VectorXd from_params(const Params &params) const;
};

// Validates kinds are distinct and theta-driven components exist in `base`
// where the model requires them. Throws Errc::invalid_argument.
void validate_parameter_space(const ParameterSpace &space);

// Independent box prior. A component with infinite upper bound is an
// improper flat prior on (lower, inf); such priors cannot be sampled.
// Support is the half open box: lower < theta <= upper componentwise.
struct Prior {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Prior uniform_box(Eigen::VectorXd lower, Eigen::VectorXd upper);
  static Prior flat_positive(int dim);

  int dim() const noexcept { return static_cast<int>(lower.size()); }
  bool contains(const Eigen::VectorXd &theta) const noexcept;

  // log density up to the usual convention for improper components, which
  // contribute zero inside the support. Returns -infinity outside.
  double log_density(const Eigen::VectorXd &theta) const noexcept;

  // Componentwise uniform draw from (lower, upper]; requires a proper box.
  Eigen::VectorXd sample(Xoshiro256pp &engine) const;
};

// Metropolis-Hastings acceptance probability
//   min(1, exp(log_new - log_old + log_hastings)).
// A -infinity log_new is never accepted; a -infinity log_old is always left.
inline double mh_acceptance(double log_new, double log_old,
                            double log_hastings = 0.0) noexcept {
  if (log_new == -std::numeric_limits<double>::infinity()) return 0.0;
  if (log_old == -std::numeric_limits<double>::infinity()) return 1.0;
  const double diff = log_new - log_old + log_hastings;
  return diff >= 0.0 ? 1.0 : std::exp(diff);
}

// Gaussian random walk step: theta + L z with L L^T = h * sigma and z a
// vector of independent standard normals drawn in index order. If sigma is
// not positive definite a ridge of 1e-12 is tried once before the failure is
// reported as Errc::numeric. h = 0 returns theta unchanged.
Eigen::VectorXd propose(const Eigen::VectorXd &theta, double h,
                        const Eigen::MatrixXd &sigma, Xoshiro256pp &engine);

// Random walk proposal configuration. In adaptive mode the covariance at
// step t is the identity while t <= adapt_t0 and the running sample
// covariance of the chain history plus adapt_epsilon * I afterwards; the
// scale h itself is never adapted.
struct Proposal {
  enum class Mode { fixed, adaptive };

  Mode mode = Mode::fixed;
  std::optional<double> h;  // unset requests the 2.38^2 / d default
  Eigen::MatrixXd sigma;  // fixed mode base covariance; empty means identity
  int adapt_t0 = 1000;
  double adapt_epsilon = 1e-4;
};

inline double default_proposal_scale(int dim) noexcept {
  return 2.38 * 2.38 / static_cast<double>(std::max(dim, 1));
}

// Streaming mean and covariance (Welford), matching the two pass sample
// covariance with the 1/(n-1) normalisation to rounding error.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(int dim)
      : count_(0), mean_(Eigen::VectorXd::Zero(dim)),
        m2_(Eigen::MatrixXd::Zero(dim, dim)) {}

  void push(const Eigen::VectorXd &x) {
    ++count_;
    const Eigen::VectorXd delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_).transpose();
  }

  std::int64_t count() const noexcept { return count_; }
  const Eigen::VectorXd &mean() const noexcept { return mean_; }

  // Sample covariance; requires count() >= 2. The accumulated m2_ is made
  // symmetric explicitly since the rank-one updates are not.
  Eigen::MatrixXd covariance() const {
    Eigen::MatrixXd sym = 0.5 * (m2_ + m2_.transpose());
    return sym / static_cast<double>(count_ - 1);
  }

 private:
  std::int64_t count_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;
};

}  // namespace epinfer

#endif  // EPINFER_METROPOLIS_HPP
