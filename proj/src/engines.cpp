#include "cptc/engines.hpp"

#include <cmath>

#include "cptc/errors.hpp"

namespace cptc {
namespace {

ScorePool make_pool(std::optional<std::size_t> capacity) {
  return capacity ? ScorePool(*capacity) : ScorePool();
}

}  // namespace

OnlineCpEngine::OnlineCpEngine(double alpha,
                               std::optional<std::size_t> pool_capacity)
    : alpha_(alpha), pool_(make_pool(pool_capacity)) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("online_cp: alpha must be in (0, 1)");
  }
}

PredictionSet OnlineCpEngine::predict(double y_hat) const {
  double q = conformal_quantile(pool_, *effective_level(alpha_));
  return interval_from_threshold(y_hat, q);
}

StepOutcome OnlineCpEngine::update(double y, double y_hat,
                                   const PredictionSet& emitted) {
  StepOutcome out{emitted.contains(y), emitted.total_width()};
  pool_.insert(nonconformity(y, y_hat));
  return out;
}

AciEngine::AciEngine(double alpha_target, double gamma,
                     std::optional<std::size_t> pool_capacity)
    : alpha_target_(alpha_target),
      gamma_(gamma),
      alpha_raw_(alpha_target),
      pool_(make_pool(pool_capacity)) {
  if (!(alpha_target > 0.0 && alpha_target < 1.0)) {
    throw ValidationError("aci: alpha must be in (0, 1)");
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("aci: gamma must be finite and >= 0");
  }
}

PredictionSet AciEngine::predict(double y_hat) const {
  auto level = effective_level(alpha_raw_);
  if (!level) return PredictionSet{};
  return interval_from_threshold(y_hat, conformal_quantile(pool_, *level));
}

StepOutcome AciEngine::update(double y, double y_hat,
                              const PredictionSet& emitted) {
  StepOutcome out{emitted.contains(y), emitted.total_width()};
  double err = out.covered ? 0.0 : 1.0;
  alpha_raw_ += gamma_ * (alpha_target_ - err);
  pool_.insert(nonconformity(y, y_hat));
  return out;
}

}  // namespace cptc
