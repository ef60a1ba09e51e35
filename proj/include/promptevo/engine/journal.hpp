#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "promptevo/serialization.hpp"

namespace promptevo::engine {

/// One journaled engine event. `seq` is the logical clock; `timestamp` is
/// whatever the submitter supplied (commands from the service carry wall
/// time, engine events leave it empty so runs stay reproducible).
struct JournalEntry {
  std::uint64_t seq = 0;
  std::string kind;
  int generation = 0;
  std::optional<int> slot;
  std::string actor = "engine";
  std::string timestamp;
  json details = json::object();
  /// Ledger entries for the model calls this event made.
  std::vector<std::size_t> ledger_indices;

  bool operator==(const JournalEntry&) const = default;
};

void to_json(json& j, const JournalEntry& e);
void from_json(const json& j, JournalEntry& e);

class Journal {
 public:
  JournalEntry& append(std::string kind, int generation, std::optional<int> slot, json details,
                       std::vector<std::size_t> ledger_indices = {});
  const std::vector<JournalEntry>& entries() const { return entries_; }
  std::vector<JournalEntry> of_kind(const std::string& kind) const;
  std::size_t size() const { return entries_.size(); }

  void restore(std::vector<JournalEntry> entries) { entries_ = std::move(entries); }
  bool operator==(const Journal&) const = default;

 private:
  std::vector<JournalEntry> entries_;
};

}  // namespace promptevo::engine
