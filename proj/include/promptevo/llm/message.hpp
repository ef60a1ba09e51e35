#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/core/types.hpp"

namespace promptevo::llm {

enum class Role { kSystem, kUser, kAssistant };

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct Message {
  Role role = Role::kUser;
  std::string content;

  static Message system(std::string content) { return {Role::kSystem, std::move(content)}; }
  static Message user(std::string content) { return {Role::kUser, std::move(content)}; }
  static Message assistant(std::string content) { return {Role::kAssistant, std::move(content)}; }

  bool operator==(const Message&) const = default;
};

using Transcript = std::vector<Message>;

/// Sampled decoding carries a temperature; greedy decoding does not.
/// `seed` makes sampled calls reproducible where the backend honours it.
struct DecodingParams {
  std::optional<double> temperature;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;

  static DecodingParams greedy(int max_tokens = 1024) { return {std::nullopt, max_tokens, {}}; }
  static DecodingParams sampled(double temperature, std::uint64_t seed, int max_tokens = 1024) {
    return {temperature, max_tokens, seed};
  }
  bool is_greedy() const { return !temperature.has_value(); }

  bool operator==(const DecodingParams&) const = default;
};

struct CompletionResult {
  std::string content;
  Usage usage;
  std::chrono::milliseconds latency{0};
  /// One latency per transport attempt, including failed ones.
  std::vector<std::chrono::milliseconds> attempt_latencies;
};

/// Stable hash over the transcript and decoding parameters. Used as the key
/// for cassette records and in "unscripted transcript" errors.
std::string transcript_hash(const Transcript& transcript, const DecodingParams& decoding);

/// Mock token accounting: whitespace-delimited words.
Usage word_count_usage(const Transcript& transcript, std::string_view response);

}  // namespace promptevo::llm
