#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/llm/gateway.hpp"
#include "promptevo/llm/openai_gateway.hpp"
#include "promptevo/operators/templates.hpp"
#include "promptevo/sim/synthetic.hpp"

namespace promptevo::app {

/// Process exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfigInvalid = 2,
  kExitGatewayUnreachable = 3,
  kExitHalted = 4,
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GatewaySettings {
  /// openai, replay or synthetic.
  std::string kind = "openai";
  llm::OpenAiConfig openai;
  std::filesystem::path cassette;
  sim::SyntheticWorld::Options synthetic;
};

/// Everything an optimize run reads from its configuration file.
///
/// {
///   "run": { RunConfig fields },
///   "task": "task.json" | { inline task },
///   "dataset": "samples.jsonl",
///   "gateway": { "kind": "openai", "base_url": ..., "model": ..., "api_key_env": ... },
///   "record_cassette": "calls.jsonl",
///   "templates_dir": "templates",
///   "output_dir": "runs/sst5"
/// }
///
/// Relative paths resolve against the configuration file's directory. With the
/// synthetic gateway the task and dataset default to the synthetic world's.
struct RunFile {
  RunConfigSpec run;
  std::optional<TaskSpec> task;
  std::vector<Sample> dataset;
  GatewaySettings gateway;
  std::optional<std::filesystem::path> record_cassette;
  std::optional<std::filesystem::path> templates_dir;
  std::filesystem::path output_dir = "promptevo-run";
};

RunFile load_run_file(const std::filesystem::path& path);

/// Task and dataset paths given on the command line replace the file's.
void override_task(RunFile& file, const std::filesystem::path& task_path);
void override_dataset(RunFile& file, const std::filesystem::path& dataset_path);

/// Fills task and dataset from the synthetic world when the gateway is synthetic.
void resolve_synthetic(RunFile& file);

operators::TemplateRegistry load_templates(const RunFile& file);

/// The gateway described by the settings, optionally wrapped in a recorder.
class GatewayStack {
 public:
  GatewayStack(const GatewaySettings& settings, const std::optional<std::filesystem::path>& record);
  llm::LlmGateway& gateway();

 private:
  std::unique_ptr<llm::LlmGateway> base_;
  std::unique_ptr<llm::LlmGateway> recorder_;
};

}  // namespace promptevo::app
