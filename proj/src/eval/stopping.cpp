#include "promptevo/eval/stopping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace promptevo::eval {

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kExhausted: return "exhausted";
    case StopReason::kMoment: return "moment";
    case StopReason::kParent: return "parent";
    case StopReason::kSubsample: return "subsample";
  }
  return "?";
}

StopReason parse_stop_reason(std::string_view text) {
  if (text == "exhausted") return StopReason::kExhausted;
  if (text == "moment") return StopReason::kMoment;
  if (text == "parent") return StopReason::kParent;
  if (text == "subsample") return StopReason::kSubsample;
  throw std::invalid_argument("unknown stop reason '" + std::string(text) + "'");
}

bool moment_stop(std::span<const double> means, double eta_m, int window, int patience) {
  const auto n = means.size();
  const auto w = static_cast<std::size_t>(window);
  if (window < 1 || n <= static_cast<std::size_t>(std::max(patience, 0)) || n < w + 1) return false;
  double total = 0.0;
  for (std::size_t k = n - w + 1; k <= n; ++k) total += std::fabs(means[k - 1] - means[k - 2]);
  return total / static_cast<double>(w) < eta_m;
}

bool moment_stop(const SampleScoreTrace& trace, double eta_m, int window, int patience) {
  return moment_stop(trace.running_means(), eta_m, window, patience);
}

bool parent_stop(const SampleScoreTrace& child, const std::vector<const SampleScoreTrace*>& parents,
                 double eta_p, int window, int patience, double eta_m) {
  StrategyConfig cfg;
  cfg.eta_m = eta_m;
  cfg.eta_p = eta_p;
  cfg.window = window;
  cfg.patience = patience;
  StoppingMonitor monitor(cfg, parents);
  std::optional<StopReason> last;
  for (const auto& e : child.entries()) last = monitor.observe(e.sample_id, e.score);
  return last.has_value();
}

StoppingMonitor::StoppingMonitor(const StrategyConfig& config,
                                 std::vector<const SampleScoreTrace*> parents)
    : config_(config) {
  for (const auto* p : parents)
    if (p != nullptr && !p->empty()) parents_.push_back(p);
  parent_sums_.assign(parents_.size(), 0.0);
  parent_alive_.assign(parents_.size(), true);
}

std::optional<StopReason> StoppingMonitor::observe(const std::string& sample_id, double score) {
  child_sum_ += score;
  const auto n = child_means_.size() + 1;
  child_means_.push_back(child_sum_ / static_cast<double>(n));

  std::optional<double> best;
  bool all_present = !parents_.empty();
  for (std::size_t p = 0; p < parents_.size(); ++p) {
    if (parent_alive_[p]) {
      if (auto s = parents_[p]->score_of(sample_id)) {
        parent_sums_[p] += *s;
      } else {
        parent_alive_[p] = false;
      }
    }
    if (!parent_alive_[p]) {
      all_present = false;
      continue;
    }
    double mean = parent_sums_[p] / static_cast<double>(n);
    best = best ? std::max(*best, mean) : mean;
  }
  best_parent_means_.push_back(all_present ? best : std::nullopt);
  return decide();
}

bool StoppingMonitor::moment_fires() const {
  return moment_stop(child_means_, config_.eta_m, config_.window, config_.patience);
}

std::optional<StopReason> StoppingMonitor::decide() const {
  const auto n = child_means_.size();
  if (n <= static_cast<std::size_t>(std::max(config_.patience, 0))) return std::nullopt;
  if (parents_.empty()) {
    return moment_fires() ? std::optional(StopReason::kMoment) : std::nullopt;
  }
  const auto w = static_cast<std::size_t>(config_.window);
  if (n < w) return std::nullopt;
  bool covered = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = n - w + 1; k <= n; ++k) {
    const auto& parent_mean = best_parent_means_[k - 1];
    if (!parent_mean) {
      covered = false;
      break;
    }
    worst = std::max(worst, child_means_[k - 1] - *parent_mean);
  }
  if (!covered) return moment_fires() ? std::optional(StopReason::kMoment) : std::nullopt;
  return worst < config_.eta_p ? std::optional(StopReason::kParent) : std::nullopt;
}

}  // namespace promptevo::eval
