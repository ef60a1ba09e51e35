#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "promptevo/engine/commands.hpp"
#include "promptevo/engine/review.hpp"
#include "promptevo/engine/run_state.hpp"
#include "promptevo/eval/metrics.hpp"
#include "promptevo/llm/gateway.hpp"
#include "promptevo/operators/evolve.hpp"

namespace promptevo::engine {

struct EngineOptions {
  CommandQueue* commands = nullptr;
  ReviewBoard* reviews = nullptr;
  /// Written after initialization, every generation and on halt.
  std::optional<std::filesystem::path> checkpoint_path;
  /// When paused, block on the command queue instead of returning.
  bool wait_when_paused = false;
  /// Receives the state after every boundary at which it changed.
  std::function<void(const RunState&)> on_snapshot;
};

enum class RunOutcome { kCompleted, kStopped, kPaused, kHalted };

std::string_view to_string(RunOutcome outcome);

/// The generational loop. The engine is the sole writer of its RunState;
/// everything else reaches it through the command queue.
class Engine {
 public:
  Engine(RunState state, llm::LlmGateway& gateway, eval::MetricRegistry metrics,
         EngineOptions options = {});

  /// Generation 0: demonstrations, base evaluation, paraphrase fill, population evaluation.
  void initialize();

  /// One generation: per slot select, evolve and evaluate, then survivor update.
  /// A paused state is left untouched.
  void step_generation();

  /// Initializes if needed, then steps until `until_generation` (default: the
  /// configured T). Gateway failures roll the state back to the last
  /// generation boundary, keep the spent ledger entries and cached scores,
  /// and return kHalted with status halted.
  RunOutcome run(std::optional<int> until_generation = std::nullopt);

  /// Drains the queue and applies every command in arrival order.
  void apply_commands();
  /// Returns false when the command was rejected (the rejection is journaled).
  bool apply_command(const FeedbackCommand& command);

  const RunState& state() const { return state_; }
  RunState& mutable_state() { return state_; }

 private:
  struct SlotResult {
    std::optional<Member> child;
  };

  eval::Evaluator make_evaluator();
  Member evaluate(const PromptGenome& genome, int generation, std::optional<int> slot);
  SlotResult run_slot(int slot, int generation, const operators::OperatorParents& parents,
                      std::vector<std::string> parent_ids);
  std::optional<std::string> await_review(int generation, int slot,
                                          const operators::EvolutionStepRecord& record);
  void record_generation(int generation, std::size_t evaluations, std::size_t samples_used);
  void checkpoint();
  void publish();
  void halt(const RunState& boundary, const std::string& reason);
  void wait_while_paused();

  RunState state_;
  llm::LlmGateway& gateway_;
  eval::MetricRegistry metrics_;
  EngineOptions options_;
  std::optional<judge::Judge> judge_;
};

}  // namespace promptevo::engine
