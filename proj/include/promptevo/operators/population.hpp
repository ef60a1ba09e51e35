#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/core/ledger.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/llm/gateway.hpp"

namespace promptevo::operators {

struct ScoredPrompt {
  PromptGenome genome;
  double fitness = 0.0;
};

/// Produces one paraphrase of `source` per call.
class Paraphraser {
 public:
  virtual ~Paraphraser() = default;
  virtual PromptGenome paraphrase(const PromptGenome& source) = 0;
};

/// Paraphrases through the model with sampled decoding. A response without an
/// extractable prompt is retried once; after that the source text is reused.
class LlmParaphraser final : public Paraphraser {
 public:
  LlmParaphraser(llm::LlmGateway& gateway, TokenLedger& ledger, std::string instruction,
                 std::mt19937_64& rng, std::function<std::string()> next_id,
                 double temperature = kDefaultEvolutionTemperature,
                 int max_tokens = kDefaultMaxTokens);

  PromptGenome paraphrase(const PromptGenome& source) override;

 private:
  llm::LlmGateway& gateway_;
  TokenLedger& ledger_;
  std::string instruction_;
  std::mt19937_64& rng_;
  std::function<std::string()> next_id_;
  double temperature_;
  int max_tokens_;
};

/// Generation-0 population of exactly `population_size` genomes: the best
/// floor(I/2) bases by fitness (all of them if there are fewer), the rest
/// paraphrases of the selected bases assigned round-robin in rank order.
std::vector<PromptGenome> init_population(const std::vector<ScoredPrompt>& bases,
                                          int population_size, Paraphraser& paraphraser);

/// Demonstrations for in-context learning: one sample per verbalizer class for
/// classification, a single sample otherwise.
std::vector<Sample> select_demonstrations(const TaskSpec& task, const std::vector<Sample>& dataset,
                                          std::mt19937_64& rng);

}  // namespace promptevo::operators
