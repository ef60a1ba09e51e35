#include "promptevo/llm/message.hpp"

#include <cstdio>

#include "promptevo/core/text.hpp"

namespace promptevo::llm {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "?";
}

Role parse_role(std::string_view text) {
  if (text == "system") return Role::kSystem;
  if (text == "user") return Role::kUser;
  if (text == "assistant") return Role::kAssistant;
  throw InvariantError("unknown role '" + std::string(text) + "'");
}

std::string transcript_hash(const Transcript& transcript, const DecodingParams& decoding) {
  // Length-prefixed fields keep the encoding unambiguous.
  std::string buf;
  auto put = [&buf](std::string_view field) {
    buf += std::to_string(field.size());
    buf += ':';
    buf += field;
  };
  for (const auto& m : transcript) {
    put(to_string(m.role));
    put(m.content);
  }
  if (decoding.temperature) {
    char t[32];
    std::snprintf(t, sizeof(t), "%.6f", *decoding.temperature);
    put(t);
  } else {
    put("greedy");
  }
  put(decoding.seed ? std::to_string(*decoding.seed) : std::string("-"));
  return to_hex(fnv1a(buf));
}

Usage word_count_usage(const Transcript& transcript, std::string_view response) {
  Usage usage;
  for (const auto& m : transcript) usage.prompt_tokens += static_cast<std::int64_t>(word_count(m.content));
  usage.completion_tokens = static_cast<std::int64_t>(word_count(response));
  return usage;
}

}  // namespace promptevo::llm
