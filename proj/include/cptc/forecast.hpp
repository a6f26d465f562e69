#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cptc/types.hpp"

namespace cptc {

// Per-state linear point forecaster: one least-squares fit (with a tiny ridge
// term for rank safety) per state, plus a pooled fit over all rows. States
// with fewer rows than coefficients fall back to the pooled fit. The pooled
// fit also serves as the state-agnostic forecast for baseline methods.
class StateLinearForecaster {
 public:
  static StateLinearForecaster fit(std::span<const Observation> train,
                                   int num_states);

  // w_z . x + b_z for state in 1..K.
  double predict(std::span<const double> x, int state) const;
  // Pooled fit, ignoring states.
  double predict_global(std::span<const double> x) const;

  int num_states() const { return static_cast<int>(weights_.size()); }
  std::size_t input_dim() const { return input_dim_; }
  const std::vector<double>& weights(int state) const;
  double bias(int state) const;

 private:
  StateLinearForecaster() = default;

  std::size_t input_dim_ = 0;
  std::vector<std::vector<double>> weights_;
  std::vector<double> biases_;
  std::vector<double> global_weights_;
  double global_bias_ = 0.0;
};

}  // namespace cptc
