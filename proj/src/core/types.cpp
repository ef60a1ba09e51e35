#include "promptevo/core/types.hpp"

#include "promptevo/core/text.hpp"

namespace promptevo {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kBase: return "base";
    case Origin::kParaphrase: return "paraphrase";
    case Origin::kEvolved: return "evolved";
    case Origin::kHumanEdited: return "human-edited";
  }
  return "?";
}

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kClassification: return "classification";
    case TaskKind::kExtractiveQa: return "extractive-qa";
    case TaskKind::kGeneration: return "generation";
  }
  return "?";
}

std::string_view to_string(Algorithm algorithm) {
  return algorithm == Algorithm::kGA ? "GA" : "DE";
}

Origin parse_origin(std::string_view text) {
  if (text == "base") return Origin::kBase;
  if (text == "paraphrase") return Origin::kParaphrase;
  if (text == "evolved") return Origin::kEvolved;
  if (text == "human-edited") return Origin::kHumanEdited;
  throw InvariantError("unknown origin '" + std::string(text) + "'");
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "classification") return TaskKind::kClassification;
  if (text == "extractive-qa") return TaskKind::kExtractiveQa;
  if (text == "generation") return TaskKind::kGeneration;
  throw InvariantError("unknown task kind '" + std::string(text) + "'");
}

Algorithm parse_algorithm(std::string_view text) {
  auto lower = to_lower(text);
  if (lower == "ga") return Algorithm::kGA;
  if (lower == "de") return Algorithm::kDE;
  throw InvariantError("unknown algorithm '" + std::string(text) + "'");
}

void PromptGenome::check() const {
  if (id_.empty()) throw InvariantError("prompt id must be non-empty");
  if (is_blank(text_)) throw InvariantError("prompt " + id_ + " has blank text");
  if (generation_ < 0) throw InvariantError("prompt " + id_ + " has negative generation");
  if (parent_ids_.size() > 3) throw InvariantError("prompt " + id_ + " has more than 3 parents");
  switch (origin_) {
    case Origin::kBase:
    case Origin::kParaphrase:
      if (generation_ != 0)
        throw InvariantError("prompt " + id_ + ": base/paraphrase prompts belong to generation 0");
      if (parent_ids_.size() > 1)
        throw InvariantError("prompt " + id_ + ": generation-0 prompts have at most one parent");
      break;
    case Origin::kEvolved:
    case Origin::kHumanEdited:
      if (generation_ < 1)
        throw InvariantError("prompt " + id_ + ": evolved prompts have generation >= 1");
      if (parent_ids_.empty())
        throw InvariantError("prompt " + id_ + ": evolved prompts need at least one parent");
      break;
  }
}

PromptGenome PromptGenome::base(std::string id, std::string text) {
  return restore(std::move(id), std::move(text), 0, Origin::kBase, {}, std::nullopt);
}

PromptGenome PromptGenome::paraphrase(std::string id, std::string text, std::string source_id) {
  return restore(std::move(id), std::move(text), 0, Origin::kParaphrase, {std::move(source_id)},
                 std::nullopt);
}

PromptGenome PromptGenome::evolved(std::string id, std::string text, int generation,
                                   std::vector<std::string> parent_ids,
                                   std::optional<std::string> template_version) {
  return restore(std::move(id), std::move(text), generation, Origin::kEvolved,
                 std::move(parent_ids), std::move(template_version));
}

PromptGenome PromptGenome::human_edited(std::string id, std::string text, int generation,
                                        std::vector<std::string> parent_ids) {
  return restore(std::move(id), std::move(text), generation, Origin::kHumanEdited,
                 std::move(parent_ids), std::nullopt);
}

PromptGenome PromptGenome::restore(std::string id, std::string text, int generation,
                                   Origin origin, std::vector<std::string> parent_ids,
                                   std::optional<std::string> template_version) {
  PromptGenome genome;
  genome.id_ = std::move(id);
  genome.text_ = std::move(text);
  genome.generation_ = generation;
  genome.origin_ = origin;
  genome.parent_ids_ = std::move(parent_ids);
  genome.template_version_ = std::move(template_version);
  genome.check();
  return genome;
}

Sample Sample::make(std::string id, std::string input, std::vector<std::string> references,
                    std::optional<std::string> label) {
  if (id.empty()) throw InvariantError("sample id must be non-empty");
  if (references.empty() && label) references.push_back(*label);
  if (references.empty()) throw InvariantError("sample " + id + " has no references");
  Sample s;
  s.input_length = utf8_length(input);
  s.id = std::move(id);
  s.input = std::move(input);
  s.references = std::move(references);
  s.label = std::move(label);
  return s;
}

}  // namespace promptevo
