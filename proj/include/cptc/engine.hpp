#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cptc/aggregate.hpp"
#include "cptc/engines.hpp"
#include "cptc/forecast.hpp"
#include "cptc/rng.hpp"
#include "cptc/scores.hpp"
#include "cptc/statepred.hpp"
#include "cptc/types.hpp"

namespace cptc {

enum class AggregationMode { kUnion, kLevelSet };
enum class SampleMode { kSampled, kArgmax };
enum class WarmStartMode { kSampled, kShared };

struct CptcConfig {
  int num_states = 1;
  double alpha = 0.1;
  double gamma = 0.005;
  AggregationMode aggregation = AggregationMode::kUnion;
  double levelset_resolution = 0.02;
  std::optional<std::size_t> pool_capacity;
  SampleMode sample_mode = SampleMode::kSampled;
  std::uint64_t seed = 0;
};

// Everything recorded about one streamed step. alphas is the per-state
// iterate vector after the step's update.
struct StepRecord {
  std::int64_t t = 0;
  double y_true = 0.0;
  PredictionSet set;
  bool covered = false;
  double width = 0.0;
  int sampled_state = 1;
  StateDistribution dist;
  std::vector<double> alphas;
  std::vector<PredictionSet> per_state;
};

// Conformal prediction with per-state score pools and per-state adaptive
// miscoverage iterates. Per step: build a state-specific band for every
// positive-probability state at that state's own effective level, aggregate
// them under the state distribution, then (once y is revealed) sample a state
// from the distribution, nudge only that state's iterate by the global
// coverage error, and absorb that state's residual into its pool.
class CptcEngine {
 public:
  explicit CptcEngine(CptcConfig cfg);

  struct Prediction {
    PredictionSet set;
    std::vector<PredictionSet> per_state;
  };

  // Warm start: draws a state from dist and stores |y - y_hat[state]| in that
  // state's pool. Iterates are untouched.
  void warm_add(const StateDistribution& dist, std::span<const double> y_hat,
                double y);
  // Warm start variant that credits every state's pool with its own residual.
  void warm_add_shared(std::span<const double> y_hat, double y);

  Prediction predict(const StateDistribution& dist,
                     std::span<const double> y_hat) const;

  StepRecord update(std::int64_t t, double y, std::span<const double> y_hat,
                    const StateDistribution& dist, const Prediction& emitted);

  int num_states() const { return cfg_.num_states; }
  double alpha(int state) const;
  const std::vector<double>& alphas() const { return alphas_; }
  std::size_t pool_size(int state) const;
  const CptcConfig& config() const { return cfg_; }

 private:
  CptcConfig cfg_;
  std::vector<ScorePool> pools_;
  std::vector<double> alphas_;
  Rng rng_;
};

// A contiguous slice of a series to stream through an engine. y is the full
// history; z_true (when present) is aligned with y; steps run over
// [begin, end) and each step reads the lookback window ending at it.
struct SeriesView {
  std::span<const double> y;
  std::span<const int> z_true;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Streams the slice through a CPTC engine: per step the forecaster provides
// one point forecast per state and the predictor provides p(z_t | x_t).
std::vector<StepRecord> run_stream(CptcEngine& engine, const SeriesView& view,
                                   StatePredictor& predictor,
                                   const StateLinearForecaster& forecaster,
                                   std::size_t lookback);

// Baseline streaming. The forecast is the pooled state-agnostic fit unless a
// predictor is supplied, in which case each step forecasts with the
// predictor's sampled state (same point forecasts a CPTC run would see).
std::vector<StepRecord> run_stream(AciEngine& engine, const SeriesView& view,
                                   const StateLinearForecaster& forecaster,
                                   std::size_t lookback,
                                   StatePredictor* predictor = nullptr,
                                   std::uint64_t sample_seed = 0);
std::vector<StepRecord> run_stream(OnlineCpEngine& engine,
                                   const SeriesView& view,
                                   const StateLinearForecaster& forecaster,
                                   std::size_t lookback,
                                   StatePredictor* predictor = nullptr,
                                   std::uint64_t sample_seed = 0);

}  // namespace cptc
