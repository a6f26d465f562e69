#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace cptc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed interval on the extended real line; endpoints may be +-inf.
struct Interval {
  double lower = 0.0;
  double upper = 0.0;

  bool contains(double y) const { return y >= lower && y <= upper; }
  double width() const { return upper - lower; }
  bool bounded() const { return std::isfinite(lower) && std::isfinite(upper); }
};

bool operator==(const Interval& a, const Interval& b);

// Finite union of disjoint closed intervals, sorted by lower endpoint, with a
// strictly positive gap between neighbours. An empty list is the empty set.
// normalize() is the canonical way to build one.
struct PredictionSet {
  std::vector<Interval> intervals;

  bool empty_set() const { return intervals.empty(); }
  bool contains(double y) const;
  // Sum of interval widths; +inf as soon as any interval is unbounded.
  double total_width() const;
  bool unbounded() const;
};

bool operator==(const PredictionSet& a, const PredictionSet& b);

// Sorts and coalesces overlapping or touching intervals. Rejects malformed
// input (lower > upper, NaN endpoints).
PredictionSet normalize(std::vector<Interval> intervals);

// Probability vector over discrete states 1..K (probs[0] is state 1).
struct StateDistribution {
  std::vector<double> probs;

  int num_states() const { return static_cast<int>(probs.size()); }
  bool valid(double tol = 1e-9) const;
  static StateDistribution point_mass(int num_states, int state);
};

// One step of a series; x is the lookback feature vector, z the true state
// when known (synthetic data).
struct Observation {
  std::int64_t t = 0;
  std::vector<double> x;
  double y = 0.0;
  std::optional<int> z;
};

}  // namespace cptc
