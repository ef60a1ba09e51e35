#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "promptevo/engine/run_state.hpp"
#include "promptevo/eval/metrics.hpp"
#include "promptevo/llm/gateway.hpp"

namespace promptevo::engine {

/// Evaluation budget of generations 1..T against the full-evaluation baseline.
struct BudgetSummary {
  std::size_t evaluations = 0;
  std::size_t samples_used = 0;
  /// |D| * I * generations_completed: samples a full-evaluation run would score.
  std::size_t samples_baseline = 0;
  double samples_fraction = 0.0;
  std::int64_t evaluation_tokens = 0;
  std::size_t evaluation_calls = 0;
  /// Mean tokens per evaluation inference.
  double tokens_per_inference = 0.0;
  /// tokens_per_inference * |D| * I * generations_completed.
  double tokens_baseline = 0.0;
  double tokens_fraction = 0.0;
  std::int64_t evaluation_wall_ms = 0;
};

BudgetSummary budget_summary(const RunState& state);

/// Scores the final population and the best-so-far prompt on `test` with full
/// evaluation, so the best prompt can be picked by validation fitness or by
/// test score. Calls are recorded in `ledger`.
json score_held_out(const RunState& state, const std::vector<Sample>& test, llm::LlmGateway& gateway,
                    const eval::MetricRegistry& metrics, TokenLedger& ledger);

/// Structured report: best prompt, fitness history, ledger totals, budget
/// fractions and the improvement over the generation-0 best. `held_out` is
/// score_held_out's output and lands under "held_out".
json build_report(const RunState& state, const std::optional<json>& held_out = std::nullopt);

/// Plain-text rendering of build_report's output.
std::string report_text(const json& report);

/// Writes report.json and report.txt into `dir`.
void write_report(const RunState& state, const std::filesystem::path& dir,
                  const std::optional<json>& held_out = std::nullopt);

}  // namespace promptevo::engine
