#include "cptc/statepred.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cptc/errors.hpp"

namespace cptc {

int sample_state(const StateDistribution& dist, Rng& rng) {
  if (!dist.valid()) {
    throw ValidationError("sample_state: invalid state distribution");
  }
  double u = rng.uniform();
  double acc = 0.0;
  int k = dist.num_states();
  for (int z = 0; z < k; ++z) {
    acc += dist.probs[static_cast<std::size_t>(z)];
    if (u < acc) return z + 1;
  }
  return k;  // u landed in rounding slack at the top
}

int argmax_state(const StateDistribution& dist) {
  if (dist.probs.empty()) {
    throw ValidationError("argmax_state: empty distribution");
  }
  std::size_t best = 0;
  for (std::size_t z = 1; z < dist.probs.size(); ++z) {
    if (dist.probs[z] > dist.probs[best]) best = z;
  }
  return static_cast<int>(best) + 1;
}

OracleStatePredictor::OracleStatePredictor(int num_states)
    : num_states_(num_states) {
  if (num_states < 1) {
    throw ValidationError("oracle predictor: num_states must be >= 1");
  }
}

StateDistribution OracleStatePredictor::predict_dist(std::span<const double>,
                                                     std::optional<int> z) {
  if (!z) {
    throw ValidationError("oracle predictor: true state label required");
  }
  return StateDistribution::point_mass(num_states_, *z);
}

NoisyOracleStatePredictor::NoisyOracleStatePredictor(int num_states,
                                                     double epsilon,
                                                     std::uint64_t seed)
    : num_states_(num_states), epsilon_(epsilon), rng_(seed) {
  if (num_states < 1) {
    throw ValidationError("noisy oracle: num_states must be >= 1");
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ValidationError("noisy oracle: epsilon must be in [0, 1]");
  }
}

StateDistribution NoisyOracleStatePredictor::predict_dist(
    std::span<const double>, std::optional<int> z) {
  if (!z) {
    throw ValidationError("noisy oracle: true state label required");
  }
  int label = *z;
  if (label < 1 || label > num_states_) {
    throw ValidationError("noisy oracle: state label out of range");
  }
  if (num_states_ > 1 && rng_.uniform() < epsilon_) {
    int shift = 1 + rng_.uniform_int(num_states_ - 1);
    label = 1 + (label - 1 + shift) % num_states_;
  }
  return StateDistribution::point_mass(num_states_, label);
}

MarkovModel fit_markov(std::span<const Observation> train, int num_states,
                       const StateLinearForecaster& forecaster) {
  if (train.empty()) {
    throw ValidationError("fit_markov: empty training set");
  }
  if (num_states < 1) {
    throw ValidationError("fit_markov: num_states must be >= 1");
  }
  const auto k = static_cast<std::size_t>(num_states);
  std::vector<std::size_t> occur(k, 0);
  std::vector<std::vector<std::size_t>> trans(k, std::vector<std::size_t>(k));
  std::vector<double> sum(k, 0.0), sumsq(k, 0.0);
  int prev = 0;
  for (const Observation& obs : train) {
    if (!obs.z || *obs.z < 1 || *obs.z > num_states) {
      throw ValidationError("fit_markov: training labels must cover 1.." +
                            std::to_string(num_states));
    }
    auto z = static_cast<std::size_t>(*obs.z - 1);
    occur[z] += 1;
    if (prev > 0) trans[static_cast<std::size_t>(prev - 1)][z] += 1;
    prev = *obs.z;
    double r = obs.y - forecaster.predict(obs.x, *obs.z);
    sum[z] += r;
    sumsq[z] += r * r;
  }
  for (std::size_t z = 0; z < k; ++z) {
    if (occur[z] == 0) {
      throw ValidationError("fit_markov: state " + std::to_string(z + 1) +
                            " never occurs in train");
    }
  }

  MarkovModel model;
  model.transition.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t row_total = 0;
    for (std::size_t j = 0; j < k; ++j) row_total += trans[i][j];
    // Add-one smoothing keeps unseen transitions reachable.
    double denom = static_cast<double>(row_total) + static_cast<double>(k);
    for (std::size_t j = 0; j < k; ++j) {
      model.transition[i][j] = (static_cast<double>(trans[i][j]) + 1.0) / denom;
    }
  }
  model.prior.resize(k);
  double prior_denom =
      static_cast<double>(train.size()) + static_cast<double>(k);
  for (std::size_t z = 0; z < k; ++z) {
    model.prior[z] = (static_cast<double>(occur[z]) + 1.0) / prior_denom;
  }
  model.emission_mean.resize(k);
  model.emission_var.resize(k);
  for (std::size_t z = 0; z < k; ++z) {
    double n = static_cast<double>(occur[z]);
    double mean = sum[z] / n;
    double var = sumsq[z] / n - mean * mean;
    model.emission_mean[z] = mean;
    model.emission_var[z] = std::max(var, 1e-12);
  }
  return model;
}

namespace {

void check_model(const MarkovModel& model) {
  std::size_t k = model.transition.size();
  if (k == 0 || model.prior.size() != k || model.emission_mean.size() != k ||
      model.emission_var.size() != k) {
    throw ValidationError("markov filter: inconsistent model shape");
  }
  for (const auto& row : model.transition) {
    if (row.size() != k) {
      throw ValidationError("markov filter: transition matrix not square");
    }
  }
  for (double v : model.emission_var) {
    if (!(v > 0.0)) {
      throw ValidationError("markov filter: emission variances must be > 0");
    }
  }
}

}  // namespace

MarkovFilterStatePredictor::MarkovFilterStatePredictor(
    MarkovModel model, std::shared_ptr<const StateLinearForecaster> fc)
    : model_(std::move(model)), forecaster_(std::move(fc)) {
  check_model(model_);
  if (!forecaster_ ||
      forecaster_->num_states() != static_cast<int>(model_.prior.size())) {
    throw ValidationError("markov filter: forecaster/model state mismatch");
  }
  posterior_ = model_.prior;
}

int MarkovFilterStatePredictor::num_states() const {
  return static_cast<int>(model_.prior.size());
}

std::vector<double> MarkovFilterStatePredictor::predictive() const {
  std::size_t k = posterior_.size();
  std::vector<double> pred(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      pred[j] += posterior_[i] * model_.transition[i][j];
    }
  }
  return pred;
}

StateDistribution MarkovFilterStatePredictor::predict_dist(
    std::span<const double>, std::optional<int>) {
  StateDistribution d;
  d.probs = predictive();
  double total = 0.0;
  for (double p : d.probs) total += p;
  for (double& p : d.probs) p /= total;
  return d;
}

void MarkovFilterStatePredictor::observe(std::span<const double> x, double y) {
  std::vector<double> pred = predictive();
  std::size_t k = pred.size();
  // Log-space emission weights, shifted by the max before exponentiating so
  // a confident wrong state cannot underflow every entry to zero.
  std::vector<double> loglik(k);
  double top = -kInf;
  for (std::size_t z = 0; z < k; ++z) {
    double r = y - forecaster_->predict(x, static_cast<int>(z) + 1);
    double d = r - model_.emission_mean[z];
    loglik[z] = -0.5 * d * d / model_.emission_var[z] -
                0.5 * std::log(model_.emission_var[z]);
    if (loglik[z] > top) top = loglik[z];
  }
  double total = 0.0;
  for (std::size_t z = 0; z < k; ++z) {
    posterior_[z] = pred[z] * std::exp(loglik[z] - top);
    total += posterior_[z];
  }
  if (total <= 0.0 || std::isnan(total)) {
    posterior_ = pred;  // degenerate emission; keep the predictive weights
    total = 0.0;
    for (double p : posterior_) total += p;
  }
  for (double& p : posterior_) p /= total;
}

}  // namespace cptc
