#pragma once

// Brute-force re-evaluation of the stopping inequalities, written directly
// from their definitions with every mean recomputed from scratch.

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/eval/stopping.hpp"

namespace promptevo::oracle {

using Stream = std::vector<std::pair<std::string, double>>;
using ScoreMap = std::map<std::string, double>;

/// m_k of the first k entries.
inline double prefix_mean(const Stream& s, std::size_t k) {
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += s[i].second;
  return sum / static_cast<double>(k);
}

/// Parent mean over the child's first k samples, if the parent scored all of them.
inline std::optional<double> parent_prefix_mean(const Stream& child, const ScoreMap& parent, std::size_t k) {
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto it = parent.find(child[i].first);
    if (it == parent.end()) return std::nullopt;
    sum += it->second;
  }
  return sum / static_cast<double>(k);
}

inline bool moment(const Stream& s, std::size_t n, const StrategyConfig& c) {
  const auto w = static_cast<std::size_t>(c.window);
  if (!(n > static_cast<std::size_t>(c.patience)) || n < w + 1) return false;
  double total = 0.0;
  for (std::size_t k = n - w + 1; k <= n; ++k) total += std::fabs(prefix_mean(s, k) - prefix_mean(s, k - 1));
  return total / static_cast<double>(w) < c.eta_m;
}

/// Decision after the first n entries of the child stream.
inline std::optional<eval::StopReason> decision(const Stream& child, const std::vector<ScoreMap>& parents,
                                                std::size_t n, const StrategyConfig& c) {
  const auto w = static_cast<std::size_t>(c.window);
  if (!(n > static_cast<std::size_t>(c.patience))) return std::nullopt;
  auto by_moment = [&]() -> std::optional<eval::StopReason> {
    if (moment(child, n, c)) return eval::StopReason::kMoment;
    return std::nullopt;
  };
  if (parents.empty()) return by_moment();
  if (n < w) return std::nullopt;
  double worst = -INFINITY;
  for (std::size_t k = n - w + 1; k <= n; ++k) {
    std::optional<double> best;
    for (const auto& p : parents) {
      auto m = parent_prefix_mean(child, p, k);
      if (!m) return by_moment();
      best = best ? std::max(*best, *m) : *m;
    }
    worst = std::max(worst, prefix_mean(child, k) - *best);
  }
  if (worst < c.eta_p) return eval::StopReason::kParent;
  return std::nullopt;
}

}  // namespace promptevo::oracle
