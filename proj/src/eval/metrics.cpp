#include "promptevo/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

#include "promptevo/core/text.hpp"

namespace promptevo::eval {

std::optional<std::string> extract_label(std::string_view output,
                                         const std::vector<std::string>& verbalizers) {
  const auto haystack = to_lower(output);
  std::optional<std::string> best;
  std::size_t best_pos = std::string::npos;
  for (const auto& v : verbalizers) {
    if (v.empty()) continue;
    auto pos = haystack.find(to_lower(v));
    if (pos != std::string::npos && (best_pos == std::string::npos || pos < best_pos)) {
      best_pos = pos;
      best = v;
    }
  }
  return best;
}

std::vector<std::string> normalize_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (unsigned char c : text) {
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  return split_words(cleaned);
}

double token_f1(std::string_view prediction, std::string_view reference) {
  auto pred = normalize_tokens(prediction);
  auto ref = normalize_tokens(reference);
  if (pred.empty() || ref.empty()) return pred.empty() && ref.empty() ? 1.0 : 0.0;
  std::map<std::string, int> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  int common = 0;
  for (const auto& t : pred) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  double recall = static_cast<double>(common) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

MetricRegistry MetricRegistry::with_builtins(std::vector<std::string> verbalizers) {
  MetricRegistry r;
  r.add("accuracy", [verbalizers](const std::string& output, const Sample& sample) {
    if (!sample.label) return 0.0;
    auto label = extract_label(output, verbalizers);
    return label && to_lower(*label) == to_lower(*sample.label) ? 1.0 : 0.0;
  });
  r.add("token_f1", [](const std::string& output, const Sample& sample) {
    double best = 0.0;
    for (const auto& ref : sample.references) best = std::max(best, token_f1(output, ref));
    return best;
  });
  r.add("exact_match", [](const std::string& output, const Sample& sample) {
    auto pred = normalize_tokens(output);
    for (const auto& ref : sample.references)
      if (normalize_tokens(ref) == pred) return 1.0;
    return 0.0;
  });
  return r;
}

void MetricRegistry::add(std::string id, Metric metric) {
  if (id.empty() || !metric) throw std::invalid_argument("metric needs an id and a function");
  metrics_.insert_or_assign(std::move(id), std::move(metric));
}

const Metric& MetricRegistry::get(const std::string& id) const {
  auto it = metrics_.find(id);
  if (it == metrics_.end()) throw std::invalid_argument("metric '" + id + "' is not registered");
  return it->second;
}

std::vector<std::string> MetricRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : metrics_) out.push_back(id);
  return out;
}

double score_output(const TaskSpec& task, const MetricRegistry& metrics, const std::string& output,
                    const Sample& sample) {
  double score = 0.0;
  switch (task.kind) {
    case TaskKind::kClassification: {
      auto label = extract_label(output, task.verbalizers);
      score = label && sample.label && to_lower(*label) == to_lower(*sample.label) ? 1.0 : 0.0;
      break;
    }
    case TaskKind::kExtractiveQa:
      for (const auto& ref : sample.references) score = std::max(score, token_f1(output, ref));
      break;
    case TaskKind::kGeneration:
      score = metrics.get(task.metric)(output, sample);
      break;
  }
  if (!(score >= 0.0 && score <= 1.0))
    throw std::domain_error("metric '" + task.metric + "' returned " + std::to_string(score) +
                            " outside [0, 1]");
  return score;
}

}  // namespace promptevo::eval
