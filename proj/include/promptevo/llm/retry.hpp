#pragma once

#include <chrono>
#include <functional>
#include <thread>

#include "promptevo/llm/gateway.hpp"

namespace promptevo::llm {

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{1000};
  double multiplier = 2.0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

inline void real_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Runs `attempt(i)` until it succeeds or fails non-retryably, at most
/// `policy.max_attempts` times, sleeping with exponential backoff in between.
template <typename Fn>
auto with_retry(const RetryPolicy& policy, const Sleeper& sleep, Fn&& attempt)
    -> decltype(attempt(0)) {
  auto backoff = policy.initial_backoff;
  for (int i = 0;; ++i) {
    try {
      return attempt(i);
    } catch (const GatewayError& e) {
      if (!e.retryable() || i + 1 >= policy.max_attempts) throw;
    }
    sleep(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(backoff.count() * policy.multiplier));
  }
}

}  // namespace promptevo::llm
