#include "promptevo/eval/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "promptevo/eval/ordering.hpp"

namespace promptevo::eval {

std::string demonstration_answer(const Sample& sample) {
  if (sample.label) return *sample.label;
  if (!sample.references.empty()) return sample.references.front();
  return "";
}

llm::Transcript render_evaluation(const std::string& prompt, const std::vector<Sample>& demonstrations,
                                  const Sample& sample) {
  std::string text = prompt;
  for (const auto& demo : demonstrations)
    text += "\n\nInput: " + demo.input + "\nOutput: " + demonstration_answer(demo);
  text += "\n\nInput: " + sample.input + "\nOutput:";
  return {llm::Message::user(std::move(text))};
}

std::size_t subsample_size(double factor, std::size_t dataset_size) {
  if (!(factor > 0.0 && factor <= 1.0))
    throw std::invalid_argument("subsample factor must lie in (0, 1]");
  auto n = static_cast<std::size_t>(std::ceil(factor * static_cast<double>(dataset_size)));
  return std::clamp<std::size_t>(n, std::min<std::size_t>(1, dataset_size), dataset_size);
}

std::vector<std::string> draw_subsample(const std::vector<Sample>& dataset, double factor,
                                        std::mt19937_64& rng) {
  const auto k = subsample_size(factor, dataset.size());
  std::vector<std::size_t> index(dataset.size());
  for (std::size_t i = 0; i < index.size(); ++i) index[i] = i;
  // Partial Fisher-Yates with explicit draws; std::shuffle is not portable across libraries.
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, index.size() - 1);
    std::swap(index[i], index[pick(rng)]);
  }
  std::sort(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < k; ++i) ids.push_back(dataset[index[i]].id);
  return ids;
}

std::int64_t cost_full(std::int64_t c_i, std::int64_t d, std::int64_t population,
                       std::int64_t generations) {
  if (c_i < 0 || d < 0 || population < 0 || generations < 0)
    throw std::invalid_argument("cost_full arguments must be non-negative");
  return c_i * d * population * generations;
}

Evaluator::Evaluator(const TaskSpec& task, const MetricRegistry& metrics,
                     std::vector<Sample> demonstrations, llm::LlmGateway& gateway,
                     TokenLedger& ledger, int max_tokens)
    : task_(task),
      metrics_(metrics),
      demonstrations_(std::move(demonstrations)),
      gateway_(gateway),
      ledger_(ledger),
      max_tokens_(max_tokens) {
  if (task_.kind == TaskKind::kGeneration && !metrics_.contains(task_.metric))
    throw std::invalid_argument("metric '" + task_.metric + "' is not registered");
}

double Evaluator::score_sample(const PromptGenome& prompt, const Sample& sample, int generation,
                               Usage* usage, std::size_t* ledger_index) {
  auto call = gateway_.complete(render_evaluation(prompt.text(), demonstrations_, sample),
                                llm::DecodingParams::greedy(max_tokens_),
                                {Phase::kEvaluation, prompt.id(), generation}, ledger_);
  if (usage != nullptr) *usage += call.result.usage;
  if (ledger_index != nullptr) *ledger_index = call.ledger_index;
  return score_output(task_, metrics_, call.result.content, sample);
}

FitnessResult Evaluator::evaluate(const PromptGenome& prompt, const std::vector<Sample>& dataset,
                                  const StrategyConfig& strategy,
                                  const std::vector<const SampleScoreTrace*>& parents,
                                  const SampleScoreTrace* best_parent,
                                  const std::vector<std::string>* subsample, int generation,
                                  ScoreCache& cache) {
  if (dataset.empty()) throw std::invalid_argument("cannot evaluate on an empty dataset");
  std::unordered_map<std::string, const Sample*> by_id;
  for (const auto& s : dataset) by_id.emplace(s.id, &s);

  std::vector<std::string> order;
  switch (strategy.mode) {
    case EvaluationMode::kFull:
      order = order_samples(dataset, SampleOrdering::kNatural);
      break;
    case EvaluationMode::kSubsample:
      if (subsample == nullptr) throw std::invalid_argument("subsample mode needs the run's draw");
      order = *subsample;
      break;
    case EvaluationMode::kEarlyStopping:
      order = order_samples(dataset, strategy.ordering, best_parent);
      break;
  }

  FitnessResult result;
  result.prompt_id = prompt.id();
  result.dataset_size = dataset.size();
  result.trace = SampleScoreTrace(prompt.id());
  result.stop_reason = strategy.mode == EvaluationMode::kSubsample ? StopReason::kSubsample
                                                                   : StopReason::kExhausted;
  StoppingMonitor monitor(strategy, parents);
  auto& cached = cache[prompt.id()];

  for (const auto& id : order) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw std::invalid_argument("sample " + id + " not in dataset");
    double score = 0.0;
    if (auto hit = cached.find(id); hit != cached.end()) {
      score = hit->second;
    } else {
      std::size_t index = 0;
      score = score_sample(prompt, *it->second, generation, &result.tokens, &index);
      result.ledger_indices.push_back(index);
      ++result.calls;
      cached.emplace(id, score);
    }
    result.trace.push(id, score);
    if (strategy.mode == EvaluationMode::kEarlyStopping) {
      if (auto reason = monitor.observe(id, score)) {
        result.stop_reason = *reason;
        break;
      }
    }
  }

  result.samples_used = result.trace.size();
  result.fitness = result.trace.mean();
  result.trace.set_complete(result.samples_used == dataset.size());
  return result;
}

}  // namespace promptevo::eval
