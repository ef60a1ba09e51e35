#include "promptevo/engine/review.hpp"

namespace promptevo::engine {

std::string_view to_string(ReviewStatus status) {
  switch (status) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kApproved: return "approved";
    case ReviewStatus::kEdited: return "edited";
    case ReviewStatus::kAutoApproved: return "auto-approved";
  }
  return "?";
}

ReviewStatus parse_review_status(std::string_view text) {
  if (text == "pending") return ReviewStatus::kPending;
  if (text == "approved") return ReviewStatus::kApproved;
  if (text == "edited") return ReviewStatus::kEdited;
  if (text == "auto-approved") return ReviewStatus::kAutoApproved;
  throw std::invalid_argument("unknown review status '" + std::string(text) + "'");
}

void to_json(json& j, const ReviewItem& item) {
  j = json{{"id", item.id},
           {"run_id", item.run_id},
           {"generation", item.generation},
           {"slot", item.slot},
           {"step", item.step},
           {"template_version", item.template_version},
           {"instruction", item.instruction},
           {"response", item.response},
           {"verdicts", item.verdicts},
           {"status", to_string(item.status)},
           {"decision_submitted", item.decision_submitted}};
  j["edited_response"] = item.edited_response ? json(*item.edited_response) : json(nullptr);
}

void from_json(const json& j, ReviewItem& item) {
  item.id = j.at("id").get<std::string>();
  item.run_id = j.at("run_id").get<std::string>();
  item.generation = j.at("generation").get<int>();
  item.slot = j.at("slot").get<int>();
  item.step = j.at("step").get<int>();
  item.template_version = j.value("template_version", std::string());
  item.instruction = j.at("instruction").get<std::string>();
  item.response = j.at("response").get<std::string>();
  item.verdicts = j.at("verdicts").get<std::vector<judge::Verdict>>();
  item.status = parse_review_status(j.at("status").get<std::string>());
  item.decision_submitted = j.value("decision_submitted", false);
  item.edited_response.reset();
  if (auto it = j.find("edited_response"); it != j.end() && !it->is_null())
    item.edited_response = it->get<std::string>();
}

void ReviewBoard::add(ReviewItem item) {
  std::lock_guard lock(mutex_);
  auto id = item.id;
  items_.insert_or_assign(std::move(id), std::move(item));
}

std::optional<ReviewItem> ReviewBoard::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = items_.find(id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::vector<ReviewItem> ReviewBoard::list(std::optional<ReviewStatus> status) const {
  std::lock_guard lock(mutex_);
  std::vector<ReviewItem> out;
  for (const auto& [id, item] : items_)
    if (!status || item.status == *status) out.push_back(item);
  return out;
}

std::size_t ReviewBoard::pending_count() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [id, item] : items_) n += item.status == ReviewStatus::kPending;
  return n;
}

ReviewBoard::Claim ReviewBoard::claim(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = items_.find(id);
  if (it == items_.end()) return Claim::kNotFound;
  if (it->second.status != ReviewStatus::kPending || it->second.decision_submitted)
    return Claim::kConflict;
  it->second.decision_submitted = true;
  return Claim::kClaimed;
}

void ReviewBoard::resolve(const std::string& id, ReviewStatus status,
                          std::optional<std::string> edited) {
  std::lock_guard lock(mutex_);
  auto it = items_.find(id);
  if (it == items_.end() || it->second.status != ReviewStatus::kPending) return;
  it->second.status = status;
  it->second.decision_submitted = true;
  it->second.edited_response = std::move(edited);
}

}  // namespace promptevo::engine
