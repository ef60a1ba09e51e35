#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace promptevo::eval {

struct ScoredSample {
  std::string sample_id;
  double score = 0.0;

  bool operator==(const ScoredSample&) const = default;
};

/// Ordered per-sample scores of one prompt together with the running means
/// m_n = (1/n) * (s_1 + ... + s_n) for every prefix length n.
class SampleScoreTrace {
 public:
  SampleScoreTrace() = default;
  explicit SampleScoreTrace(std::string prompt_id) : prompt_id_(std::move(prompt_id)) {}

  /// Appends a score in [0, 1]; a sample may appear only once.
  void push(const std::string& sample_id, double score);

  const std::string& prompt_id() const { return prompt_id_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<ScoredSample>& entries() const { return entries_; }
  const std::vector<double>& running_means() const { return means_; }
  /// m_n for 1 <= n <= size().
  double mean_at(std::size_t n) const { return means_.at(n - 1); }
  double mean() const { return means_.empty() ? 0.0 : means_.back(); }

  std::optional<double> score_of(const std::string& sample_id) const;

  bool complete() const { return complete_; }
  void set_complete(bool complete) { complete_ = complete; }

  bool operator==(const SampleScoreTrace& other) const {
    return prompt_id_ == other.prompt_id_ && entries_ == other.entries_ &&
           complete_ == other.complete_;
  }

 private:
  std::string prompt_id_;
  std::vector<ScoredSample> entries_;
  std::vector<double> means_;
  double sum_ = 0.0;
  std::unordered_map<std::string, std::size_t> index_;
  bool complete_ = false;
};

}  // namespace promptevo::eval
