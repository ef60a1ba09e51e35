#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/operators/templates.hpp"
#include "promptevo/serialization.hpp"

namespace promptevo::engine {

enum class CommandKind { kPause, kResume, kReplaceTemplate, kSetDemonstrations, kReviewDecision };

std::string_view to_string(CommandKind kind);
CommandKind parse_command_kind(std::string_view text);

/// A human (or test) instruction to the running engine. Step numbers are
/// one-based, matching "Step 1" in the operator instructions.
struct FeedbackCommand {
  CommandKind kind = CommandKind::kPause;
  // Template edits.
  std::string version;
  bool coi = true;
  int step = 0;
  std::string instruction;
  std::vector<operators::Exchange> demonstrations;
  // Review decisions.
  std::string review_id;
  bool approve = true;
  std::string edit;
  // Provenance recorded in the journal.
  std::string actor = "operator";
  std::string submitted_at;

  static FeedbackCommand pause(std::string actor = "operator");
  static FeedbackCommand resume(std::string actor = "operator");
  static FeedbackCommand replace_template(std::string version, int step, std::string instruction,
                                          bool coi = true);
  static FeedbackCommand set_demonstrations(std::string version, int step,
                                            std::vector<operators::Exchange> demonstrations,
                                            bool coi = true);
  static FeedbackCommand approve_review(std::string review_id);
  static FeedbackCommand reject_with_edit(std::string review_id, std::string edit);

  bool operator==(const FeedbackCommand&) const = default;
};

void to_json(json& j, const FeedbackCommand& c);
void from_json(const json& j, FeedbackCommand& c);

/// Multi-producer queue drained by the engine at step boundaries.
class CommandQueue {
 public:
  void push(FeedbackCommand command);
  std::vector<FeedbackCommand> drain();
  /// Blocks until a command arrives, the queue is closed or `timeout` passes
  /// (no timeout when zero). Returns nothing on timeout or close.
  std::optional<FeedbackCommand> wait_pop(std::chrono::milliseconds timeout);
  void close();
  bool closed() const;
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<FeedbackCommand> items_;
  bool closed_ = false;
};

}  // namespace promptevo::engine
