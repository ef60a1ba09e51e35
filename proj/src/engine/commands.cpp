#include "promptevo/engine/commands.hpp"

namespace promptevo::engine {

std::string_view to_string(CommandKind kind) {
  switch (kind) {
    case CommandKind::kPause: return "pause";
    case CommandKind::kResume: return "resume";
    case CommandKind::kReplaceTemplate: return "replace_template";
    case CommandKind::kSetDemonstrations: return "set_demonstrations";
    case CommandKind::kReviewDecision: return "review_decision";
  }
  return "?";
}

CommandKind parse_command_kind(std::string_view text) {
  if (text == "pause") return CommandKind::kPause;
  if (text == "resume") return CommandKind::kResume;
  if (text == "replace_template") return CommandKind::kReplaceTemplate;
  if (text == "set_demonstrations") return CommandKind::kSetDemonstrations;
  if (text == "review_decision") return CommandKind::kReviewDecision;
  throw std::invalid_argument("unknown command '" + std::string(text) + "'");
}

FeedbackCommand FeedbackCommand::pause(std::string actor) {
  FeedbackCommand c;
  c.kind = CommandKind::kPause;
  c.actor = std::move(actor);
  return c;
}

FeedbackCommand FeedbackCommand::resume(std::string actor) {
  FeedbackCommand c;
  c.kind = CommandKind::kResume;
  c.actor = std::move(actor);
  return c;
}

FeedbackCommand FeedbackCommand::replace_template(std::string version, int step,
                                                  std::string instruction, bool coi) {
  FeedbackCommand c;
  c.kind = CommandKind::kReplaceTemplate;
  c.version = std::move(version);
  c.step = step;
  c.instruction = std::move(instruction);
  c.coi = coi;
  return c;
}

FeedbackCommand FeedbackCommand::set_demonstrations(std::string version, int step,
                                                    std::vector<operators::Exchange> demonstrations,
                                                    bool coi) {
  FeedbackCommand c;
  c.kind = CommandKind::kSetDemonstrations;
  c.version = std::move(version);
  c.step = step;
  c.demonstrations = std::move(demonstrations);
  c.coi = coi;
  return c;
}

FeedbackCommand FeedbackCommand::approve_review(std::string review_id) {
  FeedbackCommand c;
  c.kind = CommandKind::kReviewDecision;
  c.review_id = std::move(review_id);
  c.approve = true;
  return c;
}

FeedbackCommand FeedbackCommand::reject_with_edit(std::string review_id, std::string edit) {
  FeedbackCommand c;
  c.kind = CommandKind::kReviewDecision;
  c.review_id = std::move(review_id);
  c.approve = false;
  c.edit = std::move(edit);
  return c;
}

void to_json(json& j, const FeedbackCommand& c) {
  j = json{{"kind", to_string(c.kind)}, {"actor", c.actor}, {"submitted_at", c.submitted_at}};
  switch (c.kind) {
    case CommandKind::kPause:
    case CommandKind::kResume:
      break;
    case CommandKind::kReplaceTemplate:
      j["version"] = c.version;
      j["coi"] = c.coi;
      j["step"] = c.step;
      j["instruction"] = c.instruction;
      break;
    case CommandKind::kSetDemonstrations:
      j["version"] = c.version;
      j["coi"] = c.coi;
      j["step"] = c.step;
      j["demonstrations"] = c.demonstrations;
      break;
    case CommandKind::kReviewDecision:
      j["review_id"] = c.review_id;
      j["approve"] = c.approve;
      if (!c.approve) j["edit"] = c.edit;
      break;
  }
}

void from_json(const json& j, FeedbackCommand& c) {
  c = FeedbackCommand{};
  c.kind = parse_command_kind(j.at("kind").get<std::string>());
  c.actor = j.value("actor", std::string("operator"));
  c.submitted_at = j.value("submitted_at", std::string());
  c.version = j.value("version", std::string());
  c.coi = j.value("coi", true);
  c.step = j.value("step", 0);
  c.instruction = j.value("instruction", std::string());
  if (j.contains("demonstrations"))
    c.demonstrations = j.at("demonstrations").get<std::vector<operators::Exchange>>();
  c.review_id = j.value("review_id", std::string());
  c.approve = j.value("approve", true);
  c.edit = j.value("edit", std::string());
}

void CommandQueue::push(FeedbackCommand command) {
  {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(command));
  }
  ready_.notify_all();
}

std::vector<FeedbackCommand> CommandQueue::drain() {
  std::lock_guard lock(mutex_);
  std::vector<FeedbackCommand> out(std::make_move_iterator(items_.begin()),
                                   std::make_move_iterator(items_.end()));
  items_.clear();
  return out;
}

std::optional<FeedbackCommand> CommandQueue::wait_pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  auto ready = [this] { return !items_.empty() || closed_; };
  if (timeout.count() > 0) {
    if (!ready_.wait_for(lock, timeout, ready)) return std::nullopt;
  } else {
    ready_.wait(lock, ready);
  }
  if (items_.empty()) return std::nullopt;
  auto command = std::move(items_.front());
  items_.pop_front();
  return command;
}

void CommandQueue::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  ready_.notify_all();
}

bool CommandQueue::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::size_t CommandQueue::size() const {
  std::lock_guard lock(mutex_);
  return items_.size();
}

}  // namespace promptevo::engine
