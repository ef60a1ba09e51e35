#pragma once

// Shared fixtures: a two-class task and a mock world where a sample's score
// depends only on the sample, never on the prompt.

#include <map>
#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/core/text.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/llm/scripted_gateway.hpp"

namespace promptevo::testing {

inline TaskSpec sentiment_task() {
  TaskSpec t;
  t.name = "sentiment";
  t.kind = TaskKind::kClassification;
  t.verbalizers = {"negative", "positive"};
  t.metric = "accuracy";
  t.base_prompts = {"Classify the review as negative or positive.",
                    "Is the sentiment of this review negative or positive?",
                    "Label the review: negative or positive.",
                    "Read the review and answer negative or positive."};
  return t;
}

inline std::string sample_id(std::size_t i) {
  auto digits = std::to_string(i);
  return "s" + std::string(digits.size() < 3 ? 3 - digits.size() : 0, '0') + digits;
}

/// n samples, "review <i>" with alternating labels.
inline std::vector<Sample> reviews(std::size_t n) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(Sample::make(sample_id(i), "review " + std::to_string(i), {},
                               i % 2 == 0 ? "positive" : "negative"));
  }
  return out;
}

inline RunConfig config_for(const TaskSpec& task, RunConfigSpec spec) {
  auto v = validate_config(spec, task);
  if (!v.ok()) throw std::invalid_argument(v.violations.front().field + ": " + v.violations.front().message);
  return *v.config;
}

/// Index of the sample named in an evaluation transcript ("Input: review <i>").
inline std::size_t asked_sample(const llm::Transcript& t) {
  const auto& text = t.back().content;
  auto pos = text.rfind("Input: review ");
  return static_cast<std::size_t>(std::stoul(text.substr(pos + 14)));
}

/// Scripts every call kind a run makes. Evaluation answers correctly exactly
/// when `correct[i]` holds, so every prompt earns the same per-sample scores.
/// Operator steps and paraphrases return a fresh prompt derived from the
/// call's seed.
inline void script_table_world(llm::ScriptedGateway& gateway, std::vector<bool> correct,
                               std::optional<Usage> usage = std::nullopt) {
  using llm::ScriptedGateway;
  gateway.register_script(ScriptedGateway::system_contains("You are acting as a judge"),
                          "<judgement>good</judgement> follows the instruction", usage);
  gateway.register_responder(
      ScriptedGateway::last_contains("\nInput: review "),
      [correct](const llm::Transcript& t, const llm::DecodingParams&) -> std::string {
        const auto i = asked_sample(t);
        const bool right = correct.at(i);
        const bool positive = i % 2 == 0;
        return positive == right ? "positive" : "negative";
      },
      usage);
  gateway.register_responder(
      ScriptedGateway::any(),
      [](const llm::Transcript&, const llm::DecodingParams& d) {
        return "<prompt>Decide if the review is negative or positive (" + to_hex(d.seed.value_or(0)) +
               ").</prompt>";
      },
      usage);
}

}  // namespace promptevo::testing
