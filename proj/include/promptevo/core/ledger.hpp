#pragma once

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/core/types.hpp"

namespace promptevo {

enum class Phase { kParaphrase, kEvolution, kJudge, kEvaluation };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

struct LedgerEntry {
  Phase phase = Phase::kEvaluation;
  std::string prompt_id;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::chrono::milliseconds wall_time{0};
  int generation = 0;

  bool operator==(const LedgerEntry&) const = default;
};

struct LedgerTotals {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::chrono::milliseconds wall_time{0};
  std::size_t calls = 0;

  std::int64_t tokens() const { return prompt_tokens + completion_tokens; }
  bool operator==(const LedgerTotals&) const = default;
};

/// Append-only record of every model call made during a run.
///
/// Appends are serialized internally so one ledger can be shared by concurrent
/// gateway callers. Entries are never edited or removed; `append` returns the
/// index of the new entry so journals can point back at individual calls.
class TokenLedger {
 public:
  TokenLedger() = default;
  TokenLedger(const TokenLedger& other);
  TokenLedger& operator=(const TokenLedger& other);

  std::size_t append(LedgerEntry entry);
  std::size_t size() const;
  std::vector<LedgerEntry> entries() const;
  LedgerEntry at(std::size_t index) const;

  LedgerTotals total(std::optional<Phase> phase = std::nullopt) const;
  /// Totals over the half-open index range [begin, end).
  LedgerTotals total_range(std::size_t begin, std::size_t end,
                           std::optional<Phase> phase = std::nullopt) const;

  bool operator==(const TokenLedger& other) const { return entries() == other.entries(); }

 private:
  mutable std::mutex mutex_;
  std::vector<LedgerEntry> entries_;
};

LedgerTotals ledger_total(const TokenLedger& ledger, std::optional<Phase> phase = std::nullopt);

}  // namespace promptevo
