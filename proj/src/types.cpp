#include "cptc/types.hpp"

#include <algorithm>

#include "cptc/errors.hpp"

namespace cptc {

bool operator==(const Interval& a, const Interval& b) {
  return a.lower == b.lower && a.upper == b.upper;
}

bool operator==(const PredictionSet& a, const PredictionSet& b) {
  return a.intervals == b.intervals;
}

bool PredictionSet::contains(double y) const {
  for (const Interval& iv : intervals) {
    if (y < iv.lower) return false;  // sorted; nothing further can match
    if (y <= iv.upper) return true;
  }
  return false;
}

double PredictionSet::total_width() const {
  double w = 0.0;
  for (const Interval& iv : intervals) w += iv.width();
  return w;
}

bool PredictionSet::unbounded() const {
  for (const Interval& iv : intervals) {
    if (!iv.bounded()) return true;
  }
  return false;
}

PredictionSet normalize(std::vector<Interval> intervals) {
  for (const Interval& iv : intervals) {
    if (std::isnan(iv.lower) || std::isnan(iv.upper)) {
      throw ValidationError("normalize: NaN interval endpoint");
    }
    if (iv.lower > iv.upper) {
      throw ValidationError("normalize: interval with lower > upper");
    }
  }
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              if (a.lower != b.lower) return a.lower < b.lower;
              return a.upper < b.upper;
            });
  PredictionSet out;
  for (const Interval& iv : intervals) {
    if (!out.intervals.empty() && iv.lower <= out.intervals.back().upper) {
      // Closed intervals: touching endpoints merge.
      out.intervals.back().upper =
          std::max(out.intervals.back().upper, iv.upper);
    } else {
      out.intervals.push_back(iv);
    }
  }
  return out;
}

bool StateDistribution::valid(double tol) const {
  if (probs.empty()) return false;
  double sum = 0.0;
  for (double p : probs) {
    if (std::isnan(p) || p < 0.0) return false;
    sum += p;
  }
  return std::abs(sum - 1.0) <= tol;
}

StateDistribution StateDistribution::point_mass(int num_states, int state) {
  if (num_states < 1 || state < 1 || state > num_states) {
    throw ValidationError("point_mass: state out of range");
  }
  StateDistribution d;
  d.probs.assign(static_cast<std::size_t>(num_states), 0.0);
  d.probs[static_cast<std::size_t>(state - 1)] = 1.0;
  return d;
}

}  // namespace cptc
