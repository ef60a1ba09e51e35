#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/judge/judge.hpp"
#include "promptevo/serialization.hpp"

namespace promptevo::engine {

enum class ReviewStatus { kPending, kApproved, kEdited, kAutoApproved };

std::string_view to_string(ReviewStatus status);
ReviewStatus parse_review_status(std::string_view text);

/// One operator step output awaiting (or past) human review.
struct ReviewItem {
  std::string id;
  std::string run_id;
  int generation = 0;
  int slot = 0;
  int step = 1;  // one-based
  std::string template_version;
  std::string instruction;
  std::string response;
  std::vector<judge::Verdict> verdicts;
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<std::string> edited_response;
  /// Set once a decision has been queued; a second decision is a conflict.
  bool decision_submitted = false;

  bool operator==(const ReviewItem&) const = default;
};

void to_json(json& j, const ReviewItem& item);
void from_json(const json& j, ReviewItem& item);

/// Shared between the engine (writer of items and outcomes) and the service
/// (reader, and claimant of decisions).
class ReviewBoard {
 public:
  enum class Claim { kClaimed, kNotFound, kConflict };

  void add(ReviewItem item);
  std::optional<ReviewItem> get(const std::string& id) const;
  std::vector<ReviewItem> list(std::optional<ReviewStatus> status = std::nullopt) const;
  std::size_t pending_count() const;

  /// Marks a pending item as decided-in-flight so no second decision is accepted.
  Claim claim(const std::string& id);

  /// Records the outcome; only pending items can transition.
  void resolve(const std::string& id, ReviewStatus status,
               std::optional<std::string> edited = std::nullopt);

 private:
  mutable std::mutex mutex_;
  std::map<std::string, ReviewItem> items_;
};

}  // namespace promptevo::engine
