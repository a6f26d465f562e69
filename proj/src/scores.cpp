#include "cptc/scores.hpp"

#include <algorithm>
#include <cmath>

#include "cptc/errors.hpp"

namespace cptc {

ScorePool::ScorePool(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("ScorePool: capacity must be >= 1");
}

void ScorePool::insert(double score) {
  if (std::isnan(score) || score < 0.0) {
    throw ValidationError("ScorePool: scores must be nonnegative");
  }
  order_.push_back(score);
  sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), score),
                 score);
  if (capacity_ && order_.size() > *capacity_) {
    double oldest = order_.front();
    order_.pop_front();
    sorted_.erase(std::lower_bound(sorted_.begin(), sorted_.end(), oldest));
  }
}

double nonconformity(double y, double y_hat) { return std::abs(y - y_hat); }

double conformal_quantile(const ScorePool& pool, double level) {
  if (!(level >= 0.0 && level <= 1.0)) {
    throw ValidationError("conformal_quantile: level must be in [0, 1]");
  }
  const std::vector<double>& s = pool.sorted();
  const std::size_t n = s.size();
  // Rank over the pool augmented with +inf: r = ceil(level * (n + 1)),
  // floored at 1. The epsilon keeps products that should be exact integers
  // from rounding up a rank.
  double x = level * static_cast<double>(n + 1);
  auto r = static_cast<std::size_t>(std::ceil(x - 1e-9));
  if (r < 1) r = 1;
  if (r > n) return kInf;
  return s[r - 1];
}

std::optional<double> effective_level(double alpha_raw) {
  if (alpha_raw >= 1.0) return std::nullopt;
  double level = 1.0 - alpha_raw;
  if (level > 1.0) level = 1.0;
  if (level < 0.0) level = 0.0;
  return level;
}

PredictionSet interval_from_threshold(double y_hat,
                                      std::optional<double> threshold) {
  if (!threshold) return PredictionSet{};
  double q = *threshold;
  if (std::isnan(q) || q < 0.0) {
    throw ValidationError("interval_from_threshold: negative threshold");
  }
  PredictionSet out;
  if (std::isinf(q)) {
    out.intervals.push_back({-kInf, kInf});
  } else {
    out.intervals.push_back({y_hat - q, y_hat + q});
  }
  return out;
}

}  // namespace cptc
