#include "promptevo/operators/population.hpp"

#include <algorithm>
#include <numeric>

#include "promptevo/core/text.hpp"
#include "promptevo/operators/extract.hpp"
#include "promptevo/operators/templates.hpp"

namespace promptevo::operators {

LlmParaphraser::LlmParaphraser(llm::LlmGateway& gateway, TokenLedger& ledger,
                               std::string instruction, std::mt19937_64& rng,
                               std::function<std::string()> next_id, double temperature,
                               int max_tokens)
    : gateway_(gateway),
      ledger_(ledger),
      instruction_(std::move(instruction)),
      rng_(rng),
      next_id_(std::move(next_id)),
      temperature_(temperature),
      max_tokens_(max_tokens) {}

PromptGenome LlmParaphraser::paraphrase(const PromptGenome& source) {
  const auto id = next_id_();
  llm::Transcript transcript{
      llm::Message::user(render_instruction(instruction_, {{"prompt", source.text()}}))};
  llm::CallTag tag{Phase::kParaphrase, id, 0};
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto decoding = llm::DecodingParams::sampled(temperature_, rng_(), max_tokens_);
    auto call = gateway_.complete(transcript, decoding, tag, ledger_);
    try {
      return PromptGenome::paraphrase(id, extract_final_prompt(call.result.content), source.id());
    } catch (const ExtractionError&) {
    }
  }
  return PromptGenome::paraphrase(id, source.text(), source.id());
}

std::vector<PromptGenome> init_population(const std::vector<ScoredPrompt>& bases,
                                          int population_size, Paraphraser& paraphraser) {
  if (bases.empty()) throw std::invalid_argument("init_population needs at least one base prompt");
  if (population_size < 2) throw std::invalid_argument("population size must be ≥ 2");

  std::vector<std::size_t> order(bases.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bases[a].fitness > bases[b].fitness;
  });
  const auto keep = std::min<std::size_t>(static_cast<std::size_t>(population_size / 2), bases.size());

  std::vector<PromptGenome> population;
  population.reserve(static_cast<std::size_t>(population_size));
  for (std::size_t i = 0; i < keep; ++i) population.push_back(bases[order[i]].genome);
  for (std::size_t k = 0; population.size() < static_cast<std::size_t>(population_size); ++k)
    population.push_back(paraphraser.paraphrase(population[k % keep]));
  return population;
}

std::vector<Sample> select_demonstrations(const TaskSpec& task, const std::vector<Sample>& dataset,
                                          std::mt19937_64& rng) {
  auto pick = [&rng](const std::vector<const Sample*>& pool) {
    std::uniform_int_distribution<std::size_t> dist(0, pool.size() - 1);
    return *pool[dist(rng)];
  };
  std::vector<Sample> demos;
  if (task.kind == TaskKind::kClassification) {
    for (const auto& verbalizer : task.verbalizers) {
      std::vector<const Sample*> pool;
      for (const auto& s : dataset)
        if (s.label && to_lower(*s.label) == to_lower(verbalizer)) pool.push_back(&s);
      if (pool.empty())
        throw std::runtime_error("no samples for class '" + verbalizer + "' to draw a demonstration from");
      demos.push_back(pick(pool));
    }
    return demos;
  }
  if (dataset.empty()) throw std::runtime_error("dataset is empty; cannot draw a demonstration");
  std::vector<const Sample*> pool;
  for (const auto& s : dataset) pool.push_back(&s);
  demos.push_back(pick(pool));
  return demos;
}

}  // namespace promptevo::operators
