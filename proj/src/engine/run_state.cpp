#include "promptevo/engine/run_state.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace promptevo::engine {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kCreated: return "created";
    case RunStatus::kRunning: return "running";
    case RunStatus::kPaused: return "paused";
    case RunStatus::kCompleted: return "completed";
    case RunStatus::kHalted: return "halted";
  }
  return "?";
}

RunStatus parse_run_status(std::string_view text) {
  if (text == "created") return RunStatus::kCreated;
  if (text == "running") return RunStatus::kRunning;
  if (text == "paused") return RunStatus::kPaused;
  if (text == "completed") return RunStatus::kCompleted;
  if (text == "halted") return RunStatus::kHalted;
  throw std::invalid_argument("unknown run status '" + std::string(text) + "'");
}

std::string RunState::allocate_id() {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "p%04llu", static_cast<unsigned long long>(next_id++));
  return buffer;
}

bool RunState::operator==(const RunState& other) const {
  return checkpoint_text(*this) == checkpoint_text(other);
}

RunState make_run_state(std::string run_id, RunConfig config, TaskSpec task,
                        std::vector<Sample> dataset, operators::TemplateRegistry templates) {
  RunState state;
  state.run_id = std::move(run_id);
  state.config = std::move(config);
  state.task = std::move(task);
  state.dataset = std::move(dataset);
  state.templates = std::move(templates);
  state.rng.seed(state.config.seed);
  return state;
}

void to_json(json& j, const Member& m) {
  j = json{{"genome", m.genome}, {"fitness", m.fitness}};
}

Member member_from_json(const json& j) {
  return Member{j.at("genome").get<PromptGenome>(), j.at("fitness").get<eval::FitnessResult>()};
}

void to_json(json& j, const GenerationStats& s) {
  j = json{{"generation", s.generation},
           {"best", s.best},
           {"mean", s.mean},
           {"best_so_far", s.best_so_far},
           {"best_id", s.best_id},
           {"population", s.population},
           {"evaluations", s.evaluations},
           {"samples_used", s.samples_used}};
}

GenerationStats stats_from_json(const json& j) {
  GenerationStats s;
  s.generation = j.at("generation").get<int>();
  s.best = j.at("best").get<double>();
  s.mean = j.at("mean").get<double>();
  s.best_so_far = j.at("best_so_far").get<double>();
  s.best_id = j.at("best_id").get<std::string>();
  s.population = j.at("population").get<std::vector<std::string>>();
  s.evaluations = j.at("evaluations").get<std::size_t>();
  s.samples_used = j.at("samples_used").get<std::size_t>();
  return s;
}

namespace {

std::string rng_text(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

}  // namespace

json state_to_json(const RunState& s) {
  json population = json::array();
  for (const auto& m : s.population) population.push_back(m);
  json genomes = json::object();
  for (const auto& [id, g] : s.genomes) genomes[id] = g;
  json evaluations = json::object();
  for (const auto& [id, r] : s.evaluations) evaluations[id] = r;
  json history = json::array();
  for (const auto& h : s.history) history.push_back(h);

  json j{{"format", "promptevo-checkpoint"},
         {"version", kCheckpointVersion},
         {"run_id", s.run_id},
         {"config", s.config},
         {"task", s.task},
         {"dataset", s.dataset},
         {"demonstrations", s.demonstrations},
         {"subsample", s.subsample},
         {"templates", operators::registry_to_json(s.templates)},
         {"population", population},
         {"genomes", genomes},
         {"evaluations", evaluations},
         {"cache", s.cache},
         {"history", history},
         {"ledger", ledger_to_json(s.ledger)},
         {"journal", s.journal.entries()},
         {"rng", rng_text(s.rng)},
         {"next_id", s.next_id},
         {"next_review", s.next_review},
         {"generation", s.generation},
         {"initialized", s.initialized},
         {"status", to_string(s.status)},
         {"halt_reason", s.halt_reason}};
  j["best_so_far"] = s.best_so_far ? json(*s.best_so_far) : json(nullptr);
  j["initial_best"] = s.initial_best ? json(*s.initial_best) : json(nullptr);
  return j;
}

RunState state_from_json(const json& j) {
  if (j.value("format", std::string()) != "promptevo-checkpoint")
    throw CheckpointError("not a checkpoint document");
  if (j.at("version").get<int>() != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + j.at("version").dump());

  RunState s;
  s.run_id = j.at("run_id").get<std::string>();
  s.task = j.at("task").get<TaskSpec>();
  auto validation = validate_config(j.at("config").get<RunConfigSpec>(), s.task);
  if (!validation.ok())
    throw CheckpointError("checkpoint config invalid: " + validation.violations.front().message);
  s.config = *validation.config;
  s.dataset = j.at("dataset").get<std::vector<Sample>>();
  s.demonstrations = j.at("demonstrations").get<std::vector<Sample>>();
  s.subsample = j.at("subsample").get<std::vector<std::string>>();
  s.templates = operators::registry_from_json(j.at("templates"));
  for (const auto& m : j.at("population")) s.population.push_back(member_from_json(m));
  for (const auto& [id, g] : j.at("genomes").items()) s.genomes.emplace(id, g.get<PromptGenome>());
  for (const auto& [id, r] : j.at("evaluations").items())
    s.evaluations.emplace(id, r.get<eval::FitnessResult>());
  s.cache = j.at("cache").get<eval::ScoreCache>();
  for (const auto& h : j.at("history")) s.history.push_back(stats_from_json(h));
  s.ledger = ledger_from_json(j.at("ledger"));
  s.journal.restore(j.at("journal").get<std::vector<JournalEntry>>());
  std::istringstream rng_in(j.at("rng").get<std::string>());
  rng_in >> s.rng;
  if (!rng_in) throw CheckpointError("corrupt RNG state");
  s.next_id = j.at("next_id").get<std::uint64_t>();
  s.next_review = j.at("next_review").get<std::uint64_t>();
  s.generation = j.at("generation").get<int>();
  s.initialized = j.at("initialized").get<bool>();
  s.status = parse_run_status(j.at("status").get<std::string>());
  s.halt_reason = j.at("halt_reason").get<std::string>();
  if (!j.at("best_so_far").is_null()) s.best_so_far = member_from_json(j.at("best_so_far"));
  if (!j.at("initial_best").is_null()) s.initial_best = j.at("initial_best").get<double>();
  return s;
}

std::string checkpoint_text(const RunState& state) { return state_to_json(state).dump(1) + "\n"; }

void write_checkpoint(const RunState& state, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out << checkpoint_text(state);
    out.flush();
    if (!out) throw CheckpointError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

RunState read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  try {
    return state_from_json(json::parse(in));
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace promptevo::engine
