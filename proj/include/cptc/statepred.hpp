#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cptc/forecast.hpp"
#include "cptc/rng.hpp"
#include "cptc/types.hpp"

namespace cptc {

// Draws a state in 1..K from dist; consumes exactly one uniform.
int sample_state(const StateDistribution& dist, Rng& rng);

int argmax_state(const StateDistribution& dist);

// Produces p(z_t | x_t) before y_t is revealed. observe() folds in the
// revealed y_t for predictors that carry state across steps.
class StatePredictor {
 public:
  virtual ~StatePredictor() = default;
  virtual StateDistribution predict_dist(std::span<const double> x,
                                         std::optional<int> z_true) = 0;
  virtual void observe(std::span<const double> x, double y) {}
  virtual int num_states() const = 0;
};

// Point mass on the true label; requires labelled data.
class OracleStatePredictor : public StatePredictor {
 public:
  explicit OracleStatePredictor(int num_states);
  StateDistribution predict_dist(std::span<const double> x,
                                 std::optional<int> z_true) override;
  int num_states() const override { return num_states_; }

 private:
  int num_states_;
};

// With probability epsilon the true label is swapped for a uniformly random
// different state; the output is a point mass on the (possibly corrupted)
// label. epsilon = 0 reduces to the oracle.
class NoisyOracleStatePredictor : public StatePredictor {
 public:
  NoisyOracleStatePredictor(int num_states, double epsilon,
                            std::uint64_t seed);
  StateDistribution predict_dist(std::span<const double> x,
                                 std::optional<int> z_true) override;
  int num_states() const override { return num_states_; }

 private:
  int num_states_;
  double epsilon_;
  Rng rng_;
};

// Bigram transition model with Gaussian emissions on forecaster residuals,
// estimated from a labelled training segment.
struct MarkovModel {
  std::vector<std::vector<double>> transition;  // K x K, rows sum to 1
  std::vector<double> prior;                    // initial state weights
  std::vector<double> emission_mean;            // per-state residual mean
  std::vector<double> emission_var;             // per-state residual variance
};

// Counts transitions with add-one smoothing and fits per-state residual
// Gaussians against the forecaster. Every state must occur in train.
MarkovModel fit_markov(std::span<const Observation> train, int num_states,
                       const StateLinearForecaster& forecaster);

// Forward filter over the bigram model. predict_dist returns the one-step
// predictive distribution A^T . posterior; observe reweights by the emission
// likelihood of the revealed point and renormalizes.
class MarkovFilterStatePredictor : public StatePredictor {
 public:
  MarkovFilterStatePredictor(MarkovModel model,
                             std::shared_ptr<const StateLinearForecaster> fc);
  StateDistribution predict_dist(std::span<const double> x,
                                 std::optional<int> z_true) override;
  void observe(std::span<const double> x, double y) override;
  int num_states() const override;
  const std::vector<double>& posterior() const { return posterior_; }

 private:
  std::vector<double> predictive() const;

  MarkovModel model_;
  std::shared_ptr<const StateLinearForecaster> forecaster_;
  std::vector<double> posterior_;
};

}  // namespace cptc
