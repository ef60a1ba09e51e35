#include "promptevo/engine/journal.hpp"

namespace promptevo::engine {

void to_json(json& j, const JournalEntry& e) {
  j = json{{"seq", e.seq},
           {"kind", e.kind},
           {"generation", e.generation},
           {"actor", e.actor},
           {"timestamp", e.timestamp},
           {"details", e.details},
           {"ledger_indices", e.ledger_indices}};
  j["slot"] = e.slot ? json(*e.slot) : json(nullptr);
}

void from_json(const json& j, JournalEntry& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = j.at("kind").get<std::string>();
  e.generation = j.at("generation").get<int>();
  e.actor = j.at("actor").get<std::string>();
  e.timestamp = j.at("timestamp").get<std::string>();
  e.details = j.at("details");
  e.ledger_indices = j.at("ledger_indices").get<std::vector<std::size_t>>();
  e.slot.reset();
  if (auto it = j.find("slot"); it != j.end() && !it->is_null()) e.slot = it->get<int>();
}

JournalEntry& Journal::append(std::string kind, int generation, std::optional<int> slot,
                              json details, std::vector<std::size_t> ledger_indices) {
  JournalEntry e;
  e.seq = entries_.size() + 1;
  e.kind = std::move(kind);
  e.generation = generation;
  e.slot = slot;
  e.details = std::move(details);
  e.ledger_indices = std::move(ledger_indices);
  entries_.push_back(std::move(e));
  return entries_.back();
}

std::vector<JournalEntry> Journal::of_kind(const std::string& kind) const {
  std::vector<JournalEntry> out;
  for (const auto& e : entries_)
    if (e.kind == kind) out.push_back(e);
  return out;
}

}  // namespace promptevo::engine
