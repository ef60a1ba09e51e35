#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/eval/trace.hpp"

namespace promptevo::eval {

enum class StopReason { kExhausted, kMoment, kParent, kSubsample };

std::string_view to_string(StopReason reason);
StopReason parse_stop_reason(std::string_view text);

/// Moment-based rule over running means m_1..m_n:
///   n > patience, n >= w + 1 and (1/w) * sum_{k=n-w+1..n} |m_k - m_{k-1}| < eta_m.
bool moment_stop(std::span<const double> running_means, double eta_m, int window, int patience);
bool moment_stop(const SampleScoreTrace& trace, double eta_m, int window, int patience);

/// Parent-based rule. Parent running means are recomputed over the child's
/// sample order from the parents' per-sample scores; m^p_k exists only while
/// the parent has scored every one of the child's first k samples. Requires
///   n > patience, n >= w and
///   max_{k=n-w+1..n} (m^child_k - max_p m^p_k) < eta_p.
/// When some window index lacks a parent mean the decision falls back to
/// moment_stop (using eta_m).
bool parent_stop(const SampleScoreTrace& child, const std::vector<const SampleScoreTrace*>& parents,
                 double eta_p, int window, int patience, double eta_m);

/// Incremental evaluation of both rules while a child is being scored.
/// With no usable parent traces only the moment rule applies.
class StoppingMonitor {
 public:
  StoppingMonitor(const StrategyConfig& config, std::vector<const SampleScoreTrace*> parents);

  /// Records the next score; returns the rule that fired, if any.
  std::optional<StopReason> observe(const std::string& sample_id, double score);

  std::size_t size() const { return child_means_.size(); }
  bool uses_parents() const { return !parents_.empty(); }

 private:
  std::optional<StopReason> decide() const;
  bool moment_fires() const;

  StrategyConfig config_;
  std::vector<const SampleScoreTrace*> parents_;
  double child_sum_ = 0.0;
  std::vector<double> child_means_;
  std::vector<double> parent_sums_;
  std::vector<bool> parent_alive_;
  /// Max parent mean per index; nullopt where some parent has no aligned mean.
  std::vector<std::optional<double>> best_parent_means_;
};

}  // namespace promptevo::eval
