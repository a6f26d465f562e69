#pragma once

#include <span>
#include <vector>

#include "cptc/types.hpp"

namespace cptc {

// Smallest state subset whose probability mass reaches 1 - alpha, chosen
// greedily by descending probability (ties broken by ascending state index).
// Returned as 1-based state ids in selection order.
std::vector<int> select_union_states(const StateDistribution& dist,
                                     double alpha);

// Union of the per-state sets over select_union_states.
PredictionSet union_aggregate(std::span<const PredictionSet> per_state,
                              const StateDistribution& dist, double alpha);

// Level set {y : sum_z p_z 1[y in G_z] >= 1 - alpha}, evaluated on a uniform
// grid of cells of the given resolution spanning the finite endpoints of the
// inputs padded by one cell; membership is tested at cell centers and
// unbounded tails are handled analytically. A distribution with exactly one
// positive-probability state short-circuits to that state's set unchanged.
PredictionSet levelset_aggregate(std::span<const PredictionSet> per_state,
                                 const StateDistribution& dist, double alpha,
                                 double resolution);

}  // namespace cptc
