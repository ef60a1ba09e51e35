#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "promptevo/core/ledger.hpp"
#include "promptevo/llm/message.hpp"

namespace promptevo::llm {

enum class GatewayErrorKind {
  kTransport,          // connection refused, timeout, 5xx
  kRateLimit,          // HTTP 429
  kMalformedResponse,  // body not parseable as a chat completion
  kContextLength,      // prompt exceeds the model window
  kUnscripted,         // mock gateway has no script for the transcript
  kRequest,            // other client-side rejection (4xx)
  kInvalidArgument,    // precondition on the transcript violated
};

std::string_view to_string(GatewayErrorKind kind);

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  GatewayErrorKind kind() const { return kind_; }
  bool retryable() const {
    return kind_ == GatewayErrorKind::kTransport || kind_ == GatewayErrorKind::kRateLimit;
  }

 private:
  GatewayErrorKind kind_;
};

/// Caller-declared accounting metadata for one model call.
struct CallTag {
  Phase phase = Phase::kEvaluation;
  std::string prompt_id;
  int generation = 0;
};

/// Uniform access to a chat-completion model.
///
/// `complete` checks the transcript, delegates to the backend and appends
/// exactly one ledger entry per call (failed calls append nothing).
class LlmGateway {
 public:
  virtual ~LlmGateway() = default;

  struct Call {
    CompletionResult result;
    std::size_t ledger_index = 0;
  };

  Call complete(const Transcript& transcript, const DecodingParams& decoding, const CallTag& tag,
                TokenLedger& ledger);

  virtual std::string name() const = 0;

 protected:
  virtual CompletionResult invoke(const Transcript& transcript, const DecodingParams& decoding,
                                  const CallTag& tag) = 0;
};

void check_transcript(const Transcript& transcript);

}  // namespace promptevo::llm
