#include "promptevo/eval/trace.hpp"

#include <stdexcept>

namespace promptevo::eval {

void SampleScoreTrace::push(const std::string& sample_id, double score) {
  if (!(score >= 0.0 && score <= 1.0))
    throw std::domain_error("per-sample score must lie in [0, 1], got " + std::to_string(score));
  if (!index_.emplace(sample_id, entries_.size()).second)
    throw std::invalid_argument("sample " + sample_id + " already scored in trace of " + prompt_id_);
  entries_.push_back({sample_id, score});
  sum_ += score;
  means_.push_back(sum_ / static_cast<double>(entries_.size()));
}

std::optional<double> SampleScoreTrace::score_of(const std::string& sample_id) const {
  auto it = index_.find(sample_id);
  if (it == index_.end()) return std::nullopt;
  return entries_[it->second].score;
}

}  // namespace promptevo::eval
