#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/core/ledger.hpp"
#include "promptevo/core/types.hpp"
#include "promptevo/engine/journal.hpp"
#include "promptevo/eval/evaluator.hpp"
#include "promptevo/operators/templates.hpp"

namespace promptevo::engine {

enum class RunStatus { kCreated, kRunning, kPaused, kCompleted, kHalted };

std::string_view to_string(RunStatus status);
RunStatus parse_run_status(std::string_view text);

struct Member {
  PromptGenome genome;
  eval::FitnessResult fitness;

  double score() const { return fitness.fitness; }
  bool operator==(const Member&) const = default;
};

struct GenerationStats {
  int generation = 0;
  double best = 0.0;
  double mean = 0.0;
  double best_so_far = 0.0;
  std::string best_id;
  std::vector<std::string> population;
  /// Evaluations run in this generation and the samples they scored.
  std::size_t evaluations = 0;
  std::size_t samples_used = 0;

  bool operator==(const GenerationStats&) const = default;
};

void to_json(json& j, const Member& m);
Member member_from_json(const json& j);
void to_json(json& j, const GenerationStats& s);
GenerationStats stats_from_json(const json& j);

/// Everything needed to continue a run: the engine's only mutable state.
struct RunState {
  std::string run_id;
  RunConfig config;
  TaskSpec task;
  std::vector<Sample> dataset;
  std::vector<Sample> demonstrations;
  std::vector<std::string> subsample;
  operators::TemplateRegistry templates;

  std::vector<Member> population;
  std::optional<Member> best_so_far;
  std::optional<double> initial_best;
  /// Every genome ever created, by id.
  std::map<std::string, PromptGenome> genomes;
  /// Latest evaluation of every scored prompt, by id.
  std::map<std::string, eval::FitnessResult> evaluations;
  eval::ScoreCache cache;
  std::vector<GenerationStats> history;

  TokenLedger ledger;
  Journal journal;
  std::mt19937_64 rng;
  std::uint64_t next_id = 1;
  std::uint64_t next_review = 1;

  /// Completed generations; 0 after initialization.
  int generation = 0;
  bool initialized = false;
  RunStatus status = RunStatus::kCreated;
  std::string halt_reason;

  std::string allocate_id();
  bool operator==(const RunState& other) const;
};

/// Fresh state for a validated configuration. The run's RNG is seeded from
/// `config.seed`.
RunState make_run_state(std::string run_id, RunConfig config, TaskSpec task,
                        std::vector<Sample> dataset, operators::TemplateRegistry templates);

inline constexpr int kCheckpointVersion = 1;

json state_to_json(const RunState& state);
RunState state_from_json(const json& j);

/// Serialized checkpoint text; the same state always yields the same bytes.
std::string checkpoint_text(const RunState& state);

/// Writes to a sibling temporary file and renames it over `path`.
void write_checkpoint(const RunState& state, const std::filesystem::path& path);
RunState read_checkpoint(const std::filesystem::path& path);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace promptevo::engine
