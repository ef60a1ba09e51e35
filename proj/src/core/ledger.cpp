#include "promptevo/core/ledger.hpp"

#include <algorithm>

namespace promptevo {

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kParaphrase: return "paraphrase";
    case Phase::kEvolution: return "evolution";
    case Phase::kJudge: return "judge";
    case Phase::kEvaluation: return "evaluation";
  }
  return "?";
}

Phase parse_phase(std::string_view text) {
  if (text == "paraphrase") return Phase::kParaphrase;
  if (text == "evolution") return Phase::kEvolution;
  if (text == "judge") return Phase::kJudge;
  if (text == "evaluation") return Phase::kEvaluation;
  throw InvariantError("unknown phase '" + std::string(text) + "'");
}

TokenLedger::TokenLedger(const TokenLedger& other) : entries_(other.entries()) {}

TokenLedger& TokenLedger::operator=(const TokenLedger& other) {
  if (this != &other) {
    auto copy = other.entries();
    std::lock_guard lock(mutex_);
    entries_ = std::move(copy);
  }
  return *this;
}

std::size_t TokenLedger::append(LedgerEntry entry) {
  if (entry.prompt_tokens < 0 || entry.completion_tokens < 0)
    throw InvariantError("ledger token counts must be non-negative");
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(entry));
  return entries_.size() - 1;
}

std::size_t TokenLedger::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<LedgerEntry> TokenLedger::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

LedgerEntry TokenLedger::at(std::size_t index) const {
  std::lock_guard lock(mutex_);
  return entries_.at(index);
}

LedgerTotals TokenLedger::total(std::optional<Phase> phase) const {
  return total_range(0, size(), phase);
}

LedgerTotals TokenLedger::total_range(std::size_t begin, std::size_t end,
                                      std::optional<Phase> phase) const {
  std::lock_guard lock(mutex_);
  LedgerTotals totals;
  end = std::min(end, entries_.size());
  for (std::size_t i = begin; i < end; ++i) {
    const auto& e = entries_[i];
    if (phase && e.phase != *phase) continue;
    totals.prompt_tokens += e.prompt_tokens;
    totals.completion_tokens += e.completion_tokens;
    totals.wall_time += e.wall_time;
    ++totals.calls;
  }
  return totals;
}

LedgerTotals ledger_total(const TokenLedger& ledger, std::optional<Phase> phase) {
  return ledger.total(phase);
}

}  // namespace promptevo
