#include "promptevo/eval/dataset.hpp"

#include <fstream>
#include <set>

#include "promptevo/core/config.hpp"
#include "promptevo/core/text.hpp"
#include "promptevo/serialization.hpp"

namespace promptevo::eval {

void validate_samples(const std::vector<Sample>& samples, const TaskSpec& task) {
  if (samples.empty()) throw DatasetError("dataset is empty");
  std::set<std::string> ids;
  std::set<std::string> labels;
  for (const auto& v : task.verbalizers) labels.insert(to_lower(v));
  for (const auto& s : samples) {
    if (s.id.empty()) throw DatasetError("sample with empty id");
    if (!ids.insert(s.id).second) throw DatasetError("duplicate sample id '" + s.id + "'");
    if (is_blank(s.input)) throw DatasetError("sample '" + s.id + "' has a blank input");
    if (task.kind == TaskKind::kClassification) {
      if (!s.label) throw DatasetError("sample '" + s.id + "' has no label");
      if (!labels.count(to_lower(*s.label)))
        throw DatasetError("sample '" + s.id + "' label '" + *s.label + "' is not a verbalizer");
    } else if (s.references.empty()) {
      throw DatasetError("sample '" + s.id + "' has no references");
    }
  }
}

std::vector<Sample> load_samples(const std::filesystem::path& path, const TaskSpec& task) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  std::vector<Sample> samples;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    if (is_blank(line)) continue;
    try {
      samples.push_back(json::parse(line).get<Sample>());
    } catch (const std::exception& e) {
      throw DatasetError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  validate_samples(samples, task);
  return samples;
}

TaskSpec load_task(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open task " + path.string());
  TaskSpec task;
  try {
    task = json::parse(in).get<TaskSpec>();
  } catch (const std::exception& e) {
    throw DatasetError(path.string() + ": " + e.what());
  }
  auto violations = validate_task(task);
  if (!violations.empty())
    throw DatasetError(path.string() + ": " + violations.front().field + ": " + violations.front().message);
  return task;
}

}  // namespace promptevo::eval
