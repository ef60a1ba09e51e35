#pragma once

// JSON conversions for the value types that cross process boundaries:
// checkpoints, reports, template files, datasets and the HTTP API.

#include <nlohmann/json.hpp>

#include "promptevo/core/config.hpp"
#include "promptevo/core/ledger.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/eval/evaluator.hpp"
#include "promptevo/eval/trace.hpp"
#include "promptevo/judge/judge.hpp"
#include "promptevo/operators/evolve.hpp"
#include "promptevo/operators/templates.hpp"

namespace promptevo {

using json = nlohmann::json;

void to_json(json& j, const Sample& s);
void from_json(const json& j, Sample& s);
void to_json(json& j, const TaskSpec& t);
void from_json(const json& j, TaskSpec& t);
void to_json(json& j, const Usage& u);
void from_json(const json& j, Usage& u);
void to_json(json& j, const LedgerEntry& e);
void from_json(const json& j, LedgerEntry& e);
void to_json(json& j, const LedgerTotals& t);
void to_json(json& j, const RunConfigSpec& s);
void from_json(const json& j, RunConfigSpec& s);
void to_json(json& j, const RunConfig& c);

json ledger_to_json(const TokenLedger& ledger);
TokenLedger ledger_from_json(const json& j);

}  // namespace promptevo

namespace nlohmann {

/// PromptGenome has no public default constructor, so it converts by value.
template <>
struct adl_serializer<promptevo::PromptGenome> {
  static void to_json(json& j, const promptevo::PromptGenome& g);
  static promptevo::PromptGenome from_json(const json& j);
};

}  // namespace nlohmann

namespace promptevo::operators {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(Exchange, instruction, response)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(StepTemplate, instruction, demonstrations)

void to_json(json& j, const OperatorTemplate& t);
void from_json(const json& j, OperatorTemplate& t);
void to_json(json& j, const EvolutionStepRecord& r);
void from_json(const json& j, EvolutionStepRecord& r);

json registry_to_json(const TemplateRegistry& registry);
TemplateRegistry registry_from_json(const json& j);

}  // namespace promptevo::operators

namespace promptevo::judge {

void to_json(json& j, const Verdict& v);
void from_json(const json& j, Verdict& v);

}  // namespace promptevo::judge

namespace promptevo::eval {

void to_json(json& j, const SampleScoreTrace& t);
void from_json(const json& j, SampleScoreTrace& t);
void to_json(json& j, const FitnessResult& r);
void from_json(const json& j, FitnessResult& r);

}  // namespace promptevo::eval
