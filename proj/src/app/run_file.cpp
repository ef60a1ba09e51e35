#include "promptevo/app/run_file.hpp"

#include <fstream>

#include "promptevo/eval/dataset.hpp"
#include "promptevo/llm/cassette.hpp"
#include "promptevo/llm/scripted_gateway.hpp"
#include "promptevo/serialization.hpp"

namespace promptevo::app {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

GatewaySettings parse_gateway(const json& j, const std::filesystem::path& base) {
  GatewaySettings g;
  g.kind = j.value("kind", std::string("openai"));
  if (g.kind == "openai") {
    g.openai.base_url = j.at("base_url").get<std::string>();
    g.openai.model = j.at("model").get<std::string>();
    g.openai.api_key_env = j.value("api_key_env", std::string("OPENAI_API_KEY"));
    g.openai.timeout = std::chrono::seconds(j.value("timeout_s", 120));
    g.openai.retry.max_attempts = j.value("max_attempts", 3);
  } else if (g.kind == "replay") {
    g.cassette = resolve(base, j.at("cassette").get<std::string>());
  } else if (g.kind == "synthetic") {
    g.synthetic.seed = j.value("seed", std::uint64_t{1});
    g.synthetic.positions = j.value("positions", g.synthetic.positions);
    g.synthetic.choices = j.value("choices", g.synthetic.choices);
    g.synthetic.samples_per_position = j.value("samples_per_position", g.synthetic.samples_per_position);
    g.synthetic.base_prompts = j.value("base_prompts", g.synthetic.base_prompts);
    g.synthetic.mutation_rate = j.value("mutation_rate", g.synthetic.mutation_rate);
  } else {
    throw ConfigError("gateway.kind must be openai, replay or synthetic, got '" + g.kind + "'");
  }
  return g;
}

}  // namespace

RunFile load_run_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  const auto base = path.parent_path();
  RunFile file;
  std::optional<std::filesystem::path> dataset_path;
  try {
    const auto doc = json::parse(in);
    if (doc.contains("run")) file.run = doc.at("run").get<RunConfigSpec>();
    if (doc.contains("gateway")) file.gateway = parse_gateway(doc.at("gateway"), base);
    if (doc.contains("task")) {
      const auto& t = doc.at("task");
      file.task = t.is_string() ? eval::load_task(resolve(base, t.get<std::string>())) : t.get<TaskSpec>();
    }
    if (doc.contains("dataset")) dataset_path = resolve(base, doc.at("dataset").get<std::string>());
    if (doc.contains("record_cassette"))
      file.record_cassette = resolve(base, doc.at("record_cassette").get<std::string>());
    if (doc.contains("templates_dir"))
      file.templates_dir = resolve(base, doc.at("templates_dir").get<std::string>());
    if (doc.contains("output_dir")) file.output_dir = resolve(base, doc.at("output_dir").get<std::string>());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (dataset_path) override_dataset(file, *dataset_path);
  return file;
}

void override_task(RunFile& file, const std::filesystem::path& task_path) {
  try {
    file.task = eval::load_task(task_path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void override_dataset(RunFile& file, const std::filesystem::path& dataset_path) {
  if (!file.task) throw ConfigError("a dataset needs a task description");
  try {
    file.dataset = eval::load_samples(dataset_path, *file.task);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

void resolve_synthetic(RunFile& file) {
  if (file.gateway.kind != "synthetic") return;
  sim::SyntheticWorld world(file.gateway.synthetic);
  if (!file.task) file.task = world.task();
  if (file.dataset.empty()) file.dataset = world.dataset();
}

operators::TemplateRegistry load_templates(const RunFile& file) {
  if (!file.templates_dir) return operators::TemplateRegistry::builtin();
  try {
    return operators::TemplateRegistry::load_directory(*file.templates_dir);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

namespace {

/// Scripted gateway that owns the world its responders point into.
class SyntheticGateway final : public llm::LlmGateway {
 public:
  explicit SyntheticGateway(const sim::SyntheticWorld::Options& options) : world_(options) {
    world_.script(scripted_);
    scripted_.freeze();
  }
  std::string name() const override { return "synthetic"; }

 protected:
  llm::CompletionResult invoke(const llm::Transcript& transcript, const llm::DecodingParams& decoding,
                               const llm::CallTag& tag) override {
    TokenLedger scratch;
    return scripted_.complete(transcript, decoding, tag, scratch).result;
  }

 private:
  sim::SyntheticWorld world_;
  llm::ScriptedGateway scripted_;
};

}  // namespace

GatewayStack::GatewayStack(const GatewaySettings& settings,
                           const std::optional<std::filesystem::path>& record) {
  if (settings.kind == "openai") {
    base_ = std::make_unique<llm::OpenAiGateway>(settings.openai);
  } else if (settings.kind == "replay") {
    try {
      base_ = std::make_unique<llm::ReplayGateway>(llm::read_cassette(settings.cassette));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
  } else {
    base_ = std::make_unique<SyntheticGateway>(settings.synthetic);
  }
  if (record) recorder_ = std::make_unique<llm::RecordingGateway>(*base_, *record);
}

llm::LlmGateway& GatewayStack::gateway() { return recorder_ ? *recorder_ : *base_; }

}  // namespace promptevo::app
