#pragma once

#include <cstddef>
#include <optional>

#include "cptc/scores.hpp"
#include "cptc/types.hpp"

namespace cptc {

struct StepOutcome {
  bool covered = false;
  double width = 0.0;
};

// Online split conformal baseline: a single score pool, fixed level 1 - alpha,
// one score appended per step.
class OnlineCpEngine {
 public:
  explicit OnlineCpEngine(double alpha,
                          std::optional<std::size_t> pool_capacity = {});

  PredictionSet predict(double y_hat) const;
  // Scores the revealed y against the set emitted for this step, then absorbs
  // the new residual into the pool.
  StepOutcome update(double y, double y_hat, const PredictionSet& emitted);
  void warm_insert(double score) { pool_.insert(score); }

  double alpha() const { return alpha_; }
  const ScorePool& pool() const { return pool_; }

 private:
  double alpha_;
  ScorePool pool_;
};

// Adaptive conformal inference baseline. The miscoverage iterate alpha_t is
// deliberately left unclamped; clipping happens only when the iterate is
// turned into a quantile level, and an iterate at or above 1 emits the empty
// set.
class AciEngine {
 public:
  AciEngine(double alpha_target, double gamma,
            std::optional<std::size_t> pool_capacity = {});

  PredictionSet predict(double y_hat) const;
  StepOutcome update(double y, double y_hat, const PredictionSet& emitted);
  void warm_insert(double score) { pool_.insert(score); }

  double alpha_raw() const { return alpha_raw_; }
  double alpha_target() const { return alpha_target_; }
  double gamma() const { return gamma_; }
  const ScorePool& pool() const { return pool_; }

 private:
  double alpha_target_;
  double gamma_;
  double alpha_raw_;
  ScorePool pool_;
};

}  // namespace cptc
