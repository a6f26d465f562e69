#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "cptc/types.hpp"

namespace cptc {

// Multiset of nonnegative nonconformity scores. Keeps both insertion order
// (for sliding-window eviction) and a sorted copy (for quantile lookups).
// Capacity nullopt means the pool grows without bound.
class ScorePool {
 public:
  ScorePool() = default;
  explicit ScorePool(std::size_t capacity);

  void insert(double score);
  std::size_t size() const { return sorted_.size(); }
  bool empty() const { return sorted_.empty(); }
  const std::vector<double>& sorted() const { return sorted_; }
  std::optional<std::size_t> capacity() const { return capacity_; }

 private:
  std::deque<double> order_;
  std::vector<double> sorted_;
  std::optional<std::size_t> capacity_;
};

// Absolute-residual score |y - y_hat|.
double nonconformity(double y, double y_hat);

// Finite-sample conformal quantile of pool u {+inf} at the given level in
// [0, 1]: rank r = ceil(level * (n + 1)) (never below 1), +inf once r exceeds
// the stored scores. Empty pool always yields +inf.
double conformal_quantile(const ScorePool& pool, double level);

// Quantile level matching a raw miscoverage iterate: nullopt once alpha_raw
// >= 1 (the prediction collapses to the empty set), otherwise
// clip(1 - alpha_raw, 0, 1). Shared by every engine so degenerate runs agree
// bit for bit.
std::optional<double> effective_level(double alpha_raw);

// Symmetric band y_hat +- threshold as a prediction set. nullopt threshold is
// the empty set; an infinite threshold is the whole line.
PredictionSet interval_from_threshold(double y_hat,
                                      std::optional<double> threshold);

}  // namespace cptc
