#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cptc/engine.hpp"

namespace cptc {

// Fraction of steps whose set contained the truth. Errors on empty input.
double coverage(std::span<const StepRecord> records);

// Mean set width; +inf as soon as any step emitted an unbounded set.
double mean_width(std::span<const StepRecord> records);

// Sliding-window coverage, one value per full window (size
// records.size() - window + 1). window must be in [1, records.size()].
std::vector<double> rolling_coverage(std::span<const StepRecord> records,
                                     std::size_t window);

// Largest deviation |window coverage - (1 - alpha)| over the horizon-length
// windows starting at each listed shift (indices into records). Every shift
// must satisfy shift + horizon <= records.size().
double post_shift_deviation(std::span<const StepRecord> records,
                            std::span<const std::size_t> shifts,
                            std::size_t horizon, double alpha);

}  // namespace cptc
