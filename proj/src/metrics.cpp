#include "cptc/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cptc/errors.hpp"

namespace cptc {

double coverage(std::span<const StepRecord> records) {
  if (records.empty()) throw ValidationError("coverage: no records");
  std::size_t hits = 0;
  for (const StepRecord& r : records) hits += r.covered ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

double mean_width(std::span<const StepRecord> records) {
  if (records.empty()) throw ValidationError("mean_width: no records");
  double sum = 0.0;
  for (const StepRecord& r : records) sum += r.width;
  return sum / static_cast<double>(records.size());
}

std::vector<double> rolling_coverage(std::span<const StepRecord> records,
                                     std::size_t window) {
  if (records.empty()) throw ValidationError("rolling_coverage: no records");
  if (window < 1 || window > records.size()) {
    throw ValidationError("rolling_coverage: window must be in [1, n]");
  }
  std::vector<double> out;
  out.reserve(records.size() - window + 1);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    hits += records[i].covered ? 1 : 0;
    if (i + 1 >= window) {
      out.push_back(static_cast<double>(hits) / static_cast<double>(window));
      hits -= records[i + 1 - window].covered ? 1 : 0;
    }
  }
  return out;
}

double post_shift_deviation(std::span<const StepRecord> records,
                            std::span<const std::size_t> shifts,
                            std::size_t horizon, double alpha) {
  if (records.empty()) throw ValidationError("post_shift_deviation: no records");
  if (horizon < 1) throw ValidationError("post_shift_deviation: horizon < 1");
  const double target = 1.0 - alpha;
  double worst = 0.0;
  for (std::size_t s : shifts) {
    if (s + horizon > records.size()) {
      throw ValidationError(
          "post_shift_deviation: shift window runs past the records");
    }
    std::size_t hits = 0;
    for (std::size_t i = s; i < s + horizon; ++i) {
      hits += records[i].covered ? 1 : 0;
    }
    double cov = static_cast<double>(hits) / static_cast<double>(horizon);
    worst = std::max(worst, std::abs(cov - target));
  }
  return worst;
}

}  // namespace cptc
