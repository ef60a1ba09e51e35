#include "promptevo/llm/gateway.hpp"

#include "promptevo/core/text.hpp"

namespace promptevo::llm {

std::string_view to_string(GatewayErrorKind kind) {
  switch (kind) {
    case GatewayErrorKind::kTransport: return "transport";
    case GatewayErrorKind::kRateLimit: return "rate-limit";
    case GatewayErrorKind::kMalformedResponse: return "malformed-response";
    case GatewayErrorKind::kContextLength: return "context-length";
    case GatewayErrorKind::kUnscripted: return "unscripted";
    case GatewayErrorKind::kRequest: return "request";
    case GatewayErrorKind::kInvalidArgument: return "invalid-argument";
  }
  return "?";
}

void check_transcript(const Transcript& transcript) {
  if (transcript.empty())
    throw GatewayError(GatewayErrorKind::kInvalidArgument, "transcript must be non-empty");
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    if (transcript[i].content.empty())
      throw GatewayError(GatewayErrorKind::kInvalidArgument,
                         "message " + std::to_string(i) + " has empty content");
    if (i > 0 && transcript[i].role == Role::kSystem)
      throw GatewayError(GatewayErrorKind::kInvalidArgument,
                         "only the first message may be a system message");
  }
}

LlmGateway::Call LlmGateway::complete(const Transcript& transcript,
                                      const DecodingParams& decoding, const CallTag& tag,
                                      TokenLedger& ledger) {
  check_transcript(transcript);
  Call call{invoke(transcript, decoding, tag), 0};
  call.ledger_index = ledger.append(LedgerEntry{tag.phase, tag.prompt_id,
                                                call.result.usage.prompt_tokens,
                                                call.result.usage.completion_tokens,
                                                call.result.latency, tag.generation});
  return call;
}

}  // namespace promptevo::llm
