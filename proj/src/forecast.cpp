#include "cptc/forecast.hpp"

#include <Eigen/Dense>
#include <string>

#include "cptc/errors.hpp"

namespace cptc {
namespace {

constexpr double kRidge = 1e-8;

struct Fit {
  std::vector<double> w;
  double b = 0.0;
};

Fit solve_ridge(const std::vector<const Observation*>& rows, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(m + 1);
  Eigen::MatrixXd X(n, d);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Observation& obs = *rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < m; ++j) {
      X(i, static_cast<Eigen::Index>(j)) = obs.x[j];
    }
    X(i, d - 1) = 1.0;  // intercept column
    y(i) = obs.y;
  }
  Eigen::MatrixXd gram = X.transpose() * X;
  gram.diagonal().array() += kRidge;
  Eigen::VectorXd beta = gram.ldlt().solve(X.transpose() * y);
  Fit fit;
  fit.w.assign(beta.data(), beta.data() + m);
  fit.b = beta(d - 1);
  return fit;
}

}  // namespace

StateLinearForecaster StateLinearForecaster::fit(
    std::span<const Observation> train, int num_states) {
  if (train.empty()) {
    throw ValidationError("forecaster fit: empty training set");
  }
  if (num_states < 1) {
    throw ValidationError("forecaster fit: num_states must be >= 1");
  }
  const std::size_t m = train.front().x.size();
  std::vector<const Observation*> all;
  std::vector<std::vector<const Observation*>> by_state(
      static_cast<std::size_t>(num_states));
  all.reserve(train.size());
  for (const Observation& obs : train) {
    if (obs.x.size() != m) {
      throw ValidationError("forecaster fit: inconsistent feature dimension");
    }
    if (!obs.z || *obs.z < 1 || *obs.z > num_states) {
      throw ValidationError(
          "forecaster fit: every training observation needs a state label in "
          "1.." +
          std::to_string(num_states));
    }
    all.push_back(&obs);
    by_state[static_cast<std::size_t>(*obs.z - 1)].push_back(&obs);
  }

  StateLinearForecaster out;
  out.input_dim_ = m;
  Fit global = solve_ridge(all, m);
  out.global_weights_ = global.w;
  out.global_bias_ = global.b;
  out.weights_.resize(static_cast<std::size_t>(num_states));
  out.biases_.resize(static_cast<std::size_t>(num_states));
  for (int z = 0; z < num_states; ++z) {
    const auto& rows = by_state[static_cast<std::size_t>(z)];
    if (rows.size() >= m + 1) {
      Fit f = solve_ridge(rows, m);
      out.weights_[static_cast<std::size_t>(z)] = f.w;
      out.biases_[static_cast<std::size_t>(z)] = f.b;
    } else {
      // Too few rows to pin down the coefficients; reuse the pooled fit.
      out.weights_[static_cast<std::size_t>(z)] = global.w;
      out.biases_[static_cast<std::size_t>(z)] = global.b;
    }
  }
  return out;
}

double StateLinearForecaster::predict(std::span<const double> x,
                                      int state) const {
  if (state < 1 || state > num_states()) {
    throw ValidationError("forecaster predict: state out of range");
  }
  if (x.size() != input_dim_) {
    throw ValidationError("forecaster predict: wrong feature dimension");
  }
  const std::vector<double>& w = weights_[static_cast<std::size_t>(state - 1)];
  double acc = biases_[static_cast<std::size_t>(state - 1)];
  for (std::size_t j = 0; j < input_dim_; ++j) acc += w[j] * x[j];
  return acc;
}

double StateLinearForecaster::predict_global(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw ValidationError("forecaster predict: wrong feature dimension");
  }
  double acc = global_bias_;
  for (std::size_t j = 0; j < input_dim_; ++j) acc += global_weights_[j] * x[j];
  return acc;
}

const std::vector<double>& StateLinearForecaster::weights(int state) const {
  if (state < 1 || state > num_states()) {
    throw ValidationError("forecaster weights: state out of range");
  }
  return weights_[static_cast<std::size_t>(state - 1)];
}

double StateLinearForecaster::bias(int state) const {
  if (state < 1 || state > num_states()) {
    throw ValidationError("forecaster bias: state out of range");
  }
  return biases_[static_cast<std::size_t>(state - 1)];
}

}  // namespace cptc
