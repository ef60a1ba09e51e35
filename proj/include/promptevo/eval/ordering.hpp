#pragma once

#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/eval/trace.hpp"

namespace promptevo::eval {

/// Permutation of the dataset's sample ids in evaluation order.
///
/// shortest-first sorts by input length in code points; hardest-first sorts
/// by the best parent's per-sample score, samples it never scored following
/// in dataset order. Both break ties by sample id. hardest-first without a
/// usable parent trace returns the natural order.
std::vector<std::string> order_samples(const std::vector<Sample>& dataset, SampleOrdering ordering,
                                       const SampleScoreTrace* best_parent = nullptr);

}  // namespace promptevo::eval
