// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/metropolis.hpp"

#include "epinfer/errors.hpp"

namespace epinfer {

namespace {

void require(bool ok, const std::string &what) {
  if (!ok) throw Error(Errc::invalid_argument, what);
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

std::string_view param_kind_name(ParamKind kind) noexcept {
  switch (kind) {
    case ParamKind::beta: return "beta";
    case ParamKind::gamma: return "gamma";
    case ParamKind::alpha: return "alpha";
    case ParamKind::p_obs: return "p_obs";
  }
  return "unknown";
}

bool ParameterSpace::in_domain(const Eigen::VectorXd &theta) const noexcept {
  if (theta.size() != dim()) return false;
  for (int i = 0; i < dim(); ++i) {
    const double v = theta[i];
    if (!std::isfinite(v) || v <= 0.0) return false;
    if (kinds[static_cast<std::size_t>(i)] == ParamKind::p_obs && v > 1.0) {
      return false;
    }
  }
  return true;
}

Params ParameterSpace::to_params(const Eigen::VectorXd &theta) const {
  Params out = base;
  for (int i = 0; i < dim(); ++i) {
    const double v = theta[i];
    switch (kinds[static_cast<std::size_t>(i)]) {
      case ParamKind::beta: out.beta = v; break;
      case ParamKind::gamma: out.gamma = v; break;
      case ParamKind::alpha: out.alpha = v; break;
      case ParamKind::p_obs: out.p_obs = v; break;
    }
  }
  return out;
}

Eigen::VectorXd ParameterSpace::from_params(const Params &params) const {
  Eigen::VectorXd theta(dim());
  for (int i = 0; i < dim(); ++i) {
    switch (kinds[static_cast<std::size_t>(i)]) {
      case ParamKind::beta: theta[i] = params.beta; break;
      case ParamKind::gamma: theta[i] = params.gamma; break;
      case ParamKind::alpha:
        require(params.alpha.has_value(), "parameter set carries no alpha");
        theta[i] = *params.alpha;
        break;
      case ParamKind::p_obs:
        require(params.p_obs.has_value(), "parameter set carries no p_obs");
        theta[i] = *params.p_obs;
        break;
    }
  }
  return theta;
}

void validate_parameter_space(const ParameterSpace &space) {
  require(!space.kinds.empty(), "parameter space must have dimension >= 1");
  for (std::size_t i = 0; i < space.kinds.size(); ++i) {
    for (std::size_t j = i + 1; j < space.kinds.size(); ++j) {
      require(space.kinds[i] != space.kinds[j],
              "parameter space lists a component twice");
    }
  }
}

Prior Prior::uniform_box(Eigen::VectorXd lower, Eigen::VectorXd upper) {
  require(lower.size() == upper.size() && lower.size() > 0,
          "prior bounds must be nonempty and of equal dimension");
  for (int i = 0; i < lower.size(); ++i) {
    require(std::isfinite(lower[i]) && lower[i] < upper[i],
            "prior bounds must satisfy lower < upper");
  }
  Prior prior;
  prior.lower = std::move(lower);
  prior.upper = std::move(upper);
  return prior;
}

Prior Prior::flat_positive(int dim) {
  require(dim > 0, "prior dimension must be positive");
  return uniform_box(Eigen::VectorXd::Zero(dim),
                     Eigen::VectorXd::Constant(dim, kInf));
}

bool Prior::contains(const Eigen::VectorXd &theta) const noexcept {
  if (theta.size() != lower.size()) return false;
  for (int i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > lower[i] && theta[i] <= upper[i])) return false;
  }
  return true;
}

double Prior::log_density(const Eigen::VectorXd &theta) const noexcept {
  if (!contains(theta)) return -kInf;
  double total = 0.0;
  for (int i = 0; i < lower.size(); ++i) {
    if (std::isfinite(upper[i])) total -= std::log(upper[i] - lower[i]);
  }
  return total;
}

Eigen::VectorXd Prior::sample(Xoshiro256pp &engine) const {
  Eigen::VectorXd theta(lower.size());
  for (int i = 0; i < lower.size(); ++i) {
    require(std::isfinite(upper[i]),
            "cannot sample a prior with an infinite bound");
    theta[i] = lower[i] + engine.uniform_oc() * (upper[i] - lower[i]);
  }
  return theta;
}

Eigen::VectorXd propose(const Eigen::VectorXd &theta, double h,
                        const Eigen::MatrixXd &sigma, Xoshiro256pp &engine) {
  require(h >= 0.0 && std::isfinite(h), "proposal scale must be nonnegative");
  require(sigma.rows() == theta.size() && sigma.cols() == theta.size(),
          "proposal covariance shape must match theta");
  if (h == 0.0) return theta;

  Eigen::MatrixXd scaled = h * sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(scaled);
  if (llt.info() != Eigen::Success) {
    scaled += 1e-12 * Eigen::MatrixXd::Identity(theta.size(), theta.size());
    llt.compute(scaled);
    if (llt.info() != Eigen::Success) {
      throw Error(Errc::numeric, "proposal covariance is not positive definite");
    }
  }

  Eigen::VectorXd z(theta.size());
  for (int i = 0; i < z.size(); ++i) z[i] = engine.normal();
  return theta + llt.matrixL() * z;
}

}  // namespace epinfer
