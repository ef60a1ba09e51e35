#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace promptevo {

enum class Origin { kBase, kParaphrase, kEvolved, kHumanEdited };
enum class TaskKind { kClassification, kExtractiveQa, kGeneration };
enum class Algorithm { kGA, kDE };

std::string_view to_string(Origin origin);
std::string_view to_string(TaskKind kind);
std::string_view to_string(Algorithm algorithm);
Origin parse_origin(std::string_view text);
TaskKind parse_task_kind(std::string_view text);
Algorithm parse_algorithm(std::string_view text);

/// Thrown when a value object would violate its invariants.
class InvariantError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A candidate prompt and its lineage. Construct through the factories, which
/// enforce the generation/origin/parent rules.
class PromptGenome {
 public:
  static PromptGenome base(std::string id, std::string text);
  static PromptGenome paraphrase(std::string id, std::string text, std::string source_id);
  static PromptGenome evolved(std::string id, std::string text, int generation,
                              std::vector<std::string> parent_ids,
                              std::optional<std::string> template_version);
  static PromptGenome human_edited(std::string id, std::string text, int generation,
                                   std::vector<std::string> parent_ids);

  /// Rebuilds a genome from serialized fields and re-checks every invariant.
  static PromptGenome restore(std::string id, std::string text, int generation, Origin origin,
                              std::vector<std::string> parent_ids,
                              std::optional<std::string> template_version);

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }
  int generation() const { return generation_; }
  Origin origin() const { return origin_; }
  const std::vector<std::string>& parent_ids() const { return parent_ids_; }
  const std::optional<std::string>& template_version() const { return template_version_; }

  bool operator==(const PromptGenome&) const = default;

 private:
  PromptGenome() = default;
  void check() const;

  std::string id_;
  std::string text_;
  int generation_ = 0;
  Origin origin_ = Origin::kBase;
  std::vector<std::string> parent_ids_;
  std::optional<std::string> template_version_;
};

struct Sample {
  std::string id;
  std::string input;
  std::vector<std::string> references;
  std::optional<std::string> label;
  std::size_t input_length = 0;  // code points of `input`

  static Sample make(std::string id, std::string input, std::vector<std::string> references,
                     std::optional<std::string> label = std::nullopt);

  bool operator==(const Sample&) const = default;
};

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::kClassification;
  std::vector<std::string> verbalizers;
  std::string metric;
  std::vector<std::string> base_prompts;

  /// Classification draws one demonstration per class, every other kind draws one.
  std::size_t demonstrations_per_run() const {
    return kind == TaskKind::kClassification ? verbalizers.size() : 1;
  }

  bool operator==(const TaskSpec&) const = default;
};

struct Usage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  Usage& operator+=(const Usage& other) {
    prompt_tokens += other.prompt_tokens;
    completion_tokens += other.completion_tokens;
    return *this;
  }
  bool operator==(const Usage&) const = default;
};

}  // namespace promptevo
