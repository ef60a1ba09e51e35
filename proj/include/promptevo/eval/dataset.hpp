#pragma once

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "promptevo/core/types.hpp"

namespace promptevo::eval {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checks samples against the task: unique non-empty ids, non-blank inputs,
/// classification labels among the verbalizers, references for QA and generation.
void validate_samples(const std::vector<Sample>& samples, const TaskSpec& task);

/// One JSON object per line with id, input, references and an optional label.
/// Blank lines are skipped; errors name the offending line.
std::vector<Sample> load_samples(const std::filesystem::path& path, const TaskSpec& task);

/// Task description: name, kind, verbalizers, metric, base_prompts.
TaskSpec load_task(const std::filesystem::path& path);

}  // namespace promptevo::eval
