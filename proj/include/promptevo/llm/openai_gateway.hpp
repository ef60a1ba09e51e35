#pragma once

#include <chrono>
#include <string>

#include "promptevo/llm/gateway.hpp"
#include "promptevo/llm/retry.hpp"

namespace promptevo::llm {

struct OpenAiConfig {
  /// e.g. "http://127.0.0.1:8000/v1"; requests go to `<base_url>/chat/completions`.
  std::string base_url;
  std::string model;
  /// Name of the environment variable holding the API key; empty means no auth header.
  std::string api_key_env;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;
};

/// Client for OpenAI-compatible chat-completion endpoints.
class OpenAiGateway final : public LlmGateway {
 public:
  explicit OpenAiGateway(OpenAiConfig config, Sleeper sleeper = real_sleep);

  std::string name() const override { return "openai:" + config_.model; }

  /// Builds the JSON request body; exposed for tests.
  std::string request_body(const Transcript& transcript, const DecodingParams& decoding) const;

 protected:
  CompletionResult invoke(const Transcript& transcript, const DecodingParams& decoding,
                          const CallTag& tag) override;

 private:
  CompletionResult attempt(const std::string& body, const Transcript& transcript) const;

  OpenAiConfig config_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string path_prefix_;
  std::string api_key_;
};

/// Parses a chat-completions response body. Usage falls back to a
/// characters/4 estimate when the endpoint omits it.
CompletionResult parse_chat_completion(const std::string& body, const Transcript& transcript);

}  // namespace promptevo::llm
