#include "cptc/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cptc/errors.hpp"

namespace cptc {
namespace {

void check_inputs(std::span<const PredictionSet> per_state,
                  const StateDistribution& dist, double alpha) {
  if (!dist.valid()) {
    throw ValidationError("aggregate: invalid state distribution");
  }
  if (per_state.size() != dist.probs.size()) {
    throw ValidationError("aggregate: per-state set count != num states");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("aggregate: alpha must be in [0, 1]");
  }
}

}  // namespace

std::vector<int> select_union_states(const StateDistribution& dist,
                                     double alpha) {
  if (!dist.valid()) {
    throw ValidationError("aggregate: invalid state distribution");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ValidationError("aggregate: alpha must be in [0, 1]");
  }
  std::vector<std::size_t> order(dist.probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // stable_sort keeps ties in ascending state order
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dist.probs[a] > dist.probs[b];
                   });
  const double need = 1.0 - alpha;
  std::vector<int> chosen;
  double mass = 0.0;
  for (std::size_t z : order) {
    if (mass >= need) break;
    if (dist.probs[z] <= 0.0) break;  // only rounding slack remains
    chosen.push_back(static_cast<int>(z) + 1);
    mass += dist.probs[z];
  }
  return chosen;
}

PredictionSet union_aggregate(std::span<const PredictionSet> per_state,
                              const StateDistribution& dist, double alpha) {
  check_inputs(per_state, dist, alpha);
  std::vector<Interval> pieces;
  for (int state : select_union_states(dist, alpha)) {
    const PredictionSet& s = per_state[static_cast<std::size_t>(state - 1)];
    pieces.insert(pieces.end(), s.intervals.begin(), s.intervals.end());
  }
  return normalize(std::move(pieces));
}

PredictionSet levelset_aggregate(std::span<const PredictionSet> per_state,
                                 const StateDistribution& dist, double alpha,
                                 double resolution) {
  check_inputs(per_state, dist, alpha);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ValidationError("aggregate: resolution must be positive and finite");
  }

  std::vector<std::size_t> active;
  for (std::size_t z = 0; z < dist.probs.size(); ++z) {
    if (dist.probs[z] > 0.0) active.push_back(z);
  }
  // One carrying state: the level set is exactly that state's set.
  if (active.size() == 1) return per_state[active.front()];

  const double need = 1.0 - alpha;

  // Tail membership is constant beyond the finite endpoints, so the two tails
  // are resolved analytically and only the finite hull is gridded.
  double w_left = 0.0;
  double w_right = 0.0;
  double hull_lo = kInf;
  double hull_hi = -kInf;
  bool any_finite = false;
  for (std::size_t z : active) {
    const auto& ivs = per_state[z].intervals;
    if (ivs.empty()) continue;
    if (ivs.front().lower == -kInf) w_left += dist.probs[z];
    if (ivs.back().upper == kInf) w_right += dist.probs[z];
    for (const Interval& iv : ivs) {
      if (std::isfinite(iv.lower)) {
        any_finite = true;
        hull_lo = std::min(hull_lo, iv.lower);
        hull_hi = std::max(hull_hi, iv.lower);
      }
      if (std::isfinite(iv.upper)) {
        any_finite = true;
        hull_lo = std::min(hull_lo, iv.upper);
        hull_hi = std::max(hull_hi, iv.upper);
      }
    }
  }

  if (!any_finite) {
    // Only empty sets and full lines among the active states.
    PredictionSet out;
    if (w_left >= need) out.intervals.push_back({-kInf, kInf});
    return out;
  }

  const double grid_lo = hull_lo - resolution;
  const double grid_hi = hull_hi + resolution;
  auto cells = static_cast<std::size_t>(
      std::ceil((grid_hi - grid_lo) / resolution - 1e-9));
  if (cells < 1) cells = 1;

  std::vector<Interval> pieces;
  if (w_left >= need) pieces.push_back({-kInf, grid_lo});
  bool open = false;
  double run_start = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    double center = grid_lo + (static_cast<double>(i) + 0.5) * resolution;
    double weight = 0.0;
    for (std::size_t z : active) {
      if (per_state[z].contains(center)) weight += dist.probs[z];
    }
    bool in = weight >= need;
    if (in && !open) {
      open = true;
      run_start = grid_lo + static_cast<double>(i) * resolution;
    } else if (!in && open) {
      open = false;
      pieces.push_back({run_start, grid_lo + static_cast<double>(i) * resolution});
    }
  }
  double grid_end = grid_lo + static_cast<double>(cells) * resolution;
  if (open) pieces.push_back({run_start, grid_end});
  if (w_right >= need) pieces.push_back({grid_end, kInf});
  return normalize(std::move(pieces));
}

}  // namespace cptc
