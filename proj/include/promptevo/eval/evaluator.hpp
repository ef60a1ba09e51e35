#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/core/ledger.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/eval/metrics.hpp"
#include "promptevo/eval/stopping.hpp"
#include "promptevo/eval/trace.hpp"
#include "promptevo/llm/gateway.hpp"

namespace promptevo::eval {

struct FitnessResult {
  std::string prompt_id;
  double fitness = 0.0;
  std::size_t samples_used = 0;
  std::size_t dataset_size = 0;
  StopReason stop_reason = StopReason::kExhausted;
  SampleScoreTrace trace;
  Usage tokens;
  /// Gateway calls actually made (cached scores cost nothing).
  std::size_t calls = 0;
  std::vector<std::size_t> ledger_indices;

  bool operator==(const FitnessResult&) const = default;
};

/// Per-sample scores by prompt id, then sample id. Never overwritten.
using ScoreCache = std::map<std::string, std::map<std::string, double>>;

/// Evaluation prompt: the candidate instruction, the demonstrations, then the input.
llm::Transcript render_evaluation(const std::string& prompt, const std::vector<Sample>& demonstrations,
                                  const Sample& sample);

/// Reference answer shown for a demonstration.
std::string demonstration_answer(const Sample& sample);

/// ceil(factor * dataset_size), at least 1.
std::size_t subsample_size(double factor, std::size_t dataset_size);

/// Seeded uniform draw without replacement, returned in dataset order.
std::vector<std::string> draw_subsample(const std::vector<Sample>& dataset, double factor,
                                        std::mt19937_64& rng);

/// c_i * d * I * T.
std::int64_t cost_full(std::int64_t tokens_per_inference, std::int64_t dataset_size,
                       std::int64_t population_size, std::int64_t generations);

class Evaluator {
 public:
  Evaluator(const TaskSpec& task, const MetricRegistry& metrics, std::vector<Sample> demonstrations,
            llm::LlmGateway& gateway, TokenLedger& ledger, int max_tokens = kDefaultMaxTokens);

  /// One greedy completion scored by the task metric.
  double score_sample(const PromptGenome& prompt, const Sample& sample, int generation,
                      Usage* usage = nullptr, std::size_t* ledger_index = nullptr);

  /// Scores `prompt` under `strategy`. `subsample` holds the run's fixed draw
  /// and is required in subsample mode. Parent traces enable the parent rule;
  /// `best_parent` drives hardest-first ordering. Scores land in `cache` as
  /// they arrive, so a gateway failure leaves the partial trace behind.
  FitnessResult evaluate(const PromptGenome& prompt, const std::vector<Sample>& dataset,
                         const StrategyConfig& strategy,
                         const std::vector<const SampleScoreTrace*>& parents,
                         const SampleScoreTrace* best_parent,
                         const std::vector<std::string>* subsample, int generation,
                         ScoreCache& cache);

  const std::vector<Sample>& demonstrations() const { return demonstrations_; }

 private:
  const TaskSpec& task_;
  const MetricRegistry& metrics_;
  std::vector<Sample> demonstrations_;
  llm::LlmGateway& gateway_;
  TokenLedger& ledger_;
  int max_tokens_;
};

}  // namespace promptevo::eval
