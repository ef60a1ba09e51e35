#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/core/types.hpp"

namespace promptevo::eval {

/// Case-insensitive scan of `output` for each verbalizer; the one whose first
/// occurrence comes earliest wins, ties going to the earlier list entry.
std::optional<std::string> extract_label(std::string_view output,
                                         const std::vector<std::string>& verbalizers);

/// Lowercased, punctuation-free whitespace tokens.
std::vector<std::string> normalize_tokens(std::string_view text);

/// Bag-of-tokens F1 between a prediction and one reference.
double token_f1(std::string_view prediction, std::string_view reference);

/// Per-sample metric: model output and sample in, score in [0, 1] out.
using Metric = std::function<double(const std::string& output, const Sample& sample)>;

class MetricRegistry {
 public:
  /// accuracy (label extraction against verbalizers), token_f1 (best over
  /// references) and exact_match.
  static MetricRegistry with_builtins(std::vector<std::string> verbalizers = {});

  void add(std::string id, Metric metric);
  bool contains(const std::string& id) const { return metrics_.count(id) > 0; }
  const Metric& get(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, Metric> metrics_;
};

/// Scores one model output: classification by extracted label, extractive QA
/// by best token F1, generation through the task's registered metric.
double score_output(const TaskSpec& task, const MetricRegistry& metrics, const std::string& output,
                    const Sample& sample);

}  // namespace promptevo::eval
