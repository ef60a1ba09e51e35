#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "promptevo/core/ledger.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/judge/judge.hpp"
#include "promptevo/llm/gateway.hpp"
#include "promptevo/operators/extract.hpp"
#include "promptevo/operators/templates.hpp"

namespace promptevo::operators {

/// What happened at one step of an operator chain.
struct EvolutionStepRecord {
  std::size_t step = 0;  // zero-based
  std::string instruction;
  std::string response;
  std::vector<judge::Verdict> verdicts;
  int attempts = 1;
  bool accepted = true;
  /// Ledger entries of every generation and judge call made for this step.
  std::vector<std::size_t> ledger_indices;
  /// Model output before a reviewer substituted `response`.
  std::optional<std::string> original_response;
  /// Set when the final step was re-run because no prompt could be extracted.
  bool extraction_retried = false;

  bool operator==(const EvolutionStepRecord&) const = default;
};

struct EvolutionOutcome {
  std::string child;
  std::vector<EvolutionStepRecord> steps;
  Usage tokens;

  std::vector<bool> accepted_by_judge() const;
};

/// Raised when the final step yields no prompt even after one re-attempt.
/// Carries the records so the caller can journal the spent calls.
class OperatorExtractionError : public ExtractionError {
 public:
  OperatorExtractionError(const std::string& what, EvolutionOutcome partial)
      : ExtractionError(what), partial_(std::move(partial)) {}
  const EvolutionOutcome& partial() const { return partial_; }

 private:
  EvolutionOutcome partial_;
};

/// Message sequence for step `t`: system message, demonstrations truncated
/// to steps 0..t, then i_0, r_0, ..., i_{t-1}, r_{t-1}, i_t.
/// `prior` must hold exactly the t completed records.
llm::Transcript build_coi_transcript(const OperatorTemplate& tmpl, std::size_t t,
                                     const std::vector<EvolutionStepRecord>& prior,
                                     const Bindings& bindings);

/// Number of messages build_coi_transcript emits before the i_0 message.
std::size_t transcript_prefix_size(const OperatorTemplate& tmpl, std::size_t t);

struct OperatorParents {
  const PromptGenome* parent1 = nullptr;
  const PromptGenome* parent2 = nullptr;
  const PromptGenome* best = nullptr;  // DE only
  const PromptGenome* base = nullptr;  // DE only
};

Bindings make_bindings(Algorithm algorithm, const OperatorParents& parents);

struct OperatorContext {
  llm::LlmGateway& gateway;
  TokenLedger& ledger;
  const judge::Judge* judge = nullptr;  // null or disabled config: no judging
  double temperature = kDefaultEvolutionTemperature;
  int max_tokens = kDefaultMaxTokens;
  llm::CallTag tag{Phase::kEvolution, "", 0};
};

struct OperatorHooks {
  /// Called before every step; the engine drains feedback commands here.
  std::function<void(std::size_t step)> before_step;
  /// Called after every step; a returned string replaces the step response.
  std::function<std::optional<std::string>(const EvolutionStepRecord&)> after_step;
};

/// Runs the operator chain step by step. `tmpl` is re-read at every step, so
/// instruction edits made from `before_step` apply to the remaining steps.
EvolutionOutcome run_operator(const OperatorTemplate& tmpl, const OperatorParents& parents,
                              OperatorContext& context, std::mt19937_64& rng,
                              const OperatorHooks& hooks = {});

}  // namespace promptevo::operators
