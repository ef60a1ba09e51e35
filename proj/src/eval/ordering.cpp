#include "promptevo/eval/ordering.hpp"

#include <algorithm>

namespace promptevo::eval {

std::vector<std::string> order_samples(const std::vector<Sample>& dataset, SampleOrdering ordering,
                                       const SampleScoreTrace* best_parent) {
  std::vector<const Sample*> items;
  items.reserve(dataset.size());
  for (const auto& s : dataset) items.push_back(&s);

  switch (ordering) {
    case SampleOrdering::kNatural:
      break;
    case SampleOrdering::kShortestFirst:
      std::stable_sort(items.begin(), items.end(), [](const Sample* a, const Sample* b) {
        if (a->input_length != b->input_length) return a->input_length < b->input_length;
        return a->id < b->id;
      });
      break;
    case SampleOrdering::kHardestFirst: {
      if (best_parent == nullptr || best_parent->empty()) break;
      std::vector<std::pair<double, const Sample*>> scored;
      std::vector<const Sample*> unscored;
      for (const auto* s : items) {
        if (auto score = best_parent->score_of(s->id)) {
          scored.emplace_back(*score, s);
        } else {
          unscored.push_back(s);
        }
      }
      std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->id < b.second->id;
      });
      items.clear();
      for (const auto& [score, s] : scored) items.push_back(s);
      items.insert(items.end(), unscored.begin(), unscored.end());
      break;
    }
  }

  std::vector<std::string> ids;
  ids.reserve(items.size());
  for (const auto* s : items) ids.push_back(s->id);
  return ids;
}

}  // namespace promptevo::eval
