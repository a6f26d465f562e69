#include "cptc/engine.hpp"

#include <cmath>
#include <string>

#include "cptc/errors.hpp"

namespace cptc {
namespace {

ScorePool make_pool(std::optional<std::size_t> capacity) {
  return capacity ? ScorePool(*capacity) : ScorePool();
}

void check_state_inputs(int num_states, const StateDistribution& dist,
                        std::span<const double> y_hat) {
  if (dist.num_states() != num_states) {
    throw ValidationError("cptc: distribution has wrong number of states");
  }
  if (!dist.valid()) {
    throw ValidationError("cptc: invalid state distribution");
  }
  if (y_hat.size() != static_cast<std::size_t>(num_states)) {
    throw ValidationError("cptc: need one point forecast per state");
  }
}

}  // namespace

CptcEngine::CptcEngine(CptcConfig cfg) : cfg_(cfg), rng_(cfg.seed) {
  if (cfg.num_states < 1) {
    throw ValidationError("cptc: num_states must be >= 1");
  }
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
    throw ValidationError("cptc: alpha must be in (0, 1)");
  }
  if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma)) {
    throw ValidationError("cptc: gamma must be finite and >= 0");
  }
  if (cfg.aggregation == AggregationMode::kLevelSet &&
      !(cfg.levelset_resolution > 0.0)) {
    throw ValidationError("cptc: levelset resolution must be > 0");
  }
  pools_.reserve(static_cast<std::size_t>(cfg.num_states));
  for (int z = 0; z < cfg.num_states; ++z) {
    pools_.push_back(make_pool(cfg.pool_capacity));
  }
  alphas_.assign(static_cast<std::size_t>(cfg.num_states), cfg.alpha);
}

void CptcEngine::warm_add(const StateDistribution& dist,
                          std::span<const double> y_hat, double y) {
  check_state_inputs(cfg_.num_states, dist, y_hat);
  int z = cfg_.sample_mode == SampleMode::kArgmax ? argmax_state(dist)
                                                  : sample_state(dist, rng_);
  auto zi = static_cast<std::size_t>(z - 1);
  pools_[zi].insert(nonconformity(y, y_hat[zi]));
}

void CptcEngine::warm_add_shared(std::span<const double> y_hat, double y) {
  if (y_hat.size() != static_cast<std::size_t>(cfg_.num_states)) {
    throw ValidationError("cptc: need one point forecast per state");
  }
  for (std::size_t z = 0; z < y_hat.size(); ++z) {
    pools_[z].insert(nonconformity(y, y_hat[z]));
  }
}

CptcEngine::Prediction CptcEngine::predict(
    const StateDistribution& dist, std::span<const double> y_hat) const {
  check_state_inputs(cfg_.num_states, dist, y_hat);
  Prediction pred;
  pred.per_state.resize(static_cast<std::size_t>(cfg_.num_states));
  for (std::size_t z = 0; z < pred.per_state.size(); ++z) {
    if (dist.probs[z] <= 0.0) continue;  // left as the empty set
    auto level = effective_level(alphas_[z]);
    if (!level) continue;  // iterate at or beyond 1: this state predicts {}
    double q = conformal_quantile(pools_[z], *level);
    pred.per_state[z] = interval_from_threshold(y_hat[z], q);
  }
  pred.set = cfg_.aggregation == AggregationMode::kUnion
                 ? union_aggregate(pred.per_state, dist, cfg_.alpha)
                 : levelset_aggregate(pred.per_state, dist, cfg_.alpha,
                                      cfg_.levelset_resolution);
  return pred;
}

StepRecord CptcEngine::update(std::int64_t t, double y,
                              std::span<const double> y_hat,
                              const StateDistribution& dist,
                              const Prediction& emitted) {
  check_state_inputs(cfg_.num_states, dist, y_hat);
  if (emitted.per_state.size() != static_cast<std::size_t>(cfg_.num_states)) {
    throw ValidationError("cptc: update needs the prediction it emitted");
  }
  bool covered = emitted.set.contains(y);
  double err = covered ? 0.0 : 1.0;
  int zhat = cfg_.sample_mode == SampleMode::kArgmax
                 ? argmax_state(dist)
                 : sample_state(dist, rng_);
  auto zi = static_cast<std::size_t>(zhat - 1);
  alphas_[zi] += cfg_.gamma * (cfg_.alpha - err);
  pools_[zi].insert(nonconformity(y, y_hat[zi]));

  StepRecord rec;
  rec.t = t;
  rec.y_true = y;
  rec.set = emitted.set;
  rec.covered = covered;
  rec.width = emitted.set.total_width();
  rec.sampled_state = zhat;
  rec.dist = dist;
  rec.alphas = alphas_;
  rec.per_state = emitted.per_state;
  return rec;
}

double CptcEngine::alpha(int state) const {
  if (state < 1 || state > cfg_.num_states) {
    throw ValidationError("cptc: state out of range");
  }
  return alphas_[static_cast<std::size_t>(state - 1)];
}

std::size_t CptcEngine::pool_size(int state) const {
  if (state < 1 || state > cfg_.num_states) {
    throw ValidationError("cptc: state out of range");
  }
  return pools_[static_cast<std::size_t>(state - 1)].size();
}

namespace {

void check_view(const SeriesView& view, std::size_t lookback) {
  if (lookback < 1) {
    throw ValidationError("run_stream: lookback must be >= 1");
  }
  if (view.end > view.y.size() || view.begin > view.end) {
    throw ValidationError("run_stream: view out of range");
  }
  if (view.begin < lookback) {
    throw ValidationError(
        "run_stream: series too short for one full lookback window");
  }
  if (!view.z_true.empty() && view.z_true.size() != view.y.size()) {
    throw ValidationError("run_stream: state labels not aligned with series");
  }
}

void fill_window(const SeriesView& view, std::size_t t, std::size_t lookback,
                 std::vector<double>& x) {
  for (std::size_t j = 0; j < lookback; ++j) {
    x[j] = view.y[t - lookback + j];
  }
}

std::optional<int> label_at(const SeriesView& view, std::size_t t) {
  if (view.z_true.empty()) return std::nullopt;
  return view.z_true[t];
}

// Shared loop for the single-pool baselines; the two engine types only differ
// in the iterate they report.
template <typename Engine>
std::vector<StepRecord> run_baseline(Engine& engine, const SeriesView& view,
                                     const StateLinearForecaster& forecaster,
                                     std::size_t lookback,
                                     StatePredictor* predictor,
                                     std::uint64_t sample_seed,
                                     double initial_alpha) {
  check_view(view, lookback);
  Rng rng(sample_seed);
  std::vector<double> x(lookback);
  std::vector<StepRecord> records;
  records.reserve(view.end - view.begin);
  double alpha_now = initial_alpha;
  for (std::size_t t = view.begin; t < view.end; ++t) {
    fill_window(view, t, lookback, x);
    int state = 1;
    double y_hat;
    if (predictor) {
      StateDistribution dist = predictor->predict_dist(x, label_at(view, t));
      state = sample_state(dist, rng);
      y_hat = forecaster.predict(x, state);
    } else {
      y_hat = forecaster.predict_global(x);
    }
    PredictionSet set = engine.predict(y_hat);
    StepOutcome out = engine.update(view.y[t], y_hat, set);
    if (predictor) predictor->observe(x, view.y[t]);
    if constexpr (requires { engine.alpha_raw(); }) {
      alpha_now = engine.alpha_raw();
    }
    StepRecord rec;
    rec.t = static_cast<std::int64_t>(t);
    rec.y_true = view.y[t];
    rec.set = set;
    rec.covered = out.covered;
    rec.width = out.width;
    rec.sampled_state = state;
    rec.dist = StateDistribution::point_mass(1, 1);
    rec.alphas = {alpha_now};
    rec.per_state = {set};
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::vector<StepRecord> run_stream(CptcEngine& engine, const SeriesView& view,
                                   StatePredictor& predictor,
                                   const StateLinearForecaster& forecaster,
                                   std::size_t lookback) {
  check_view(view, lookback);
  const int k = engine.num_states();
  if (predictor.num_states() != k || forecaster.num_states() != k) {
    throw ValidationError("run_stream: engine/predictor/forecaster disagree "
                          "on the number of states");
  }
  std::vector<double> x(lookback);
  std::vector<double> y_hat(static_cast<std::size_t>(k));
  std::vector<StepRecord> records;
  records.reserve(view.end - view.begin);
  for (std::size_t t = view.begin; t < view.end; ++t) {
    fill_window(view, t, lookback, x);
    for (int z = 1; z <= k; ++z) {
      y_hat[static_cast<std::size_t>(z - 1)] = forecaster.predict(x, z);
    }
    StateDistribution dist = predictor.predict_dist(x, label_at(view, t));
    CptcEngine::Prediction pred = engine.predict(dist, y_hat);
    records.push_back(engine.update(static_cast<std::int64_t>(t), view.y[t],
                                    y_hat, dist, pred));
    predictor.observe(x, view.y[t]);
  }
  return records;
}

std::vector<StepRecord> run_stream(AciEngine& engine, const SeriesView& view,
                                   const StateLinearForecaster& forecaster,
                                   std::size_t lookback,
                                   StatePredictor* predictor,
                                   std::uint64_t sample_seed) {
  return run_baseline(engine, view, forecaster, lookback, predictor,
                      sample_seed, engine.alpha_raw());
}

std::vector<StepRecord> run_stream(OnlineCpEngine& engine,
                                   const SeriesView& view,
                                   const StateLinearForecaster& forecaster,
                                   std::size_t lookback,
                                   StatePredictor* predictor,
                                   std::uint64_t sample_seed) {
  return run_baseline(engine, view, forecaster, lookback, predictor,
                      sample_seed, engine.alpha());
}

}  // namespace cptc
