#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "promptevo/llm/gateway.hpp"

namespace promptevo::llm {

using TranscriptMatcher = std::function<bool(const Transcript&)>;
/// Computes a response from the transcript; `decoding.seed` is the only
/// source of variation a responder may use, which keeps replays exact.
using Responder = std::function<std::string(const Transcript&, const DecodingParams&)>;

/// Deterministic stand-in for a model endpoint.
///
/// Scripts are tried in registration order and the first matching one serves
/// the call. A call that matches nothing fails with an "unscripted transcript"
/// error; the mock never invents output. Token usage defaults to whitespace
/// word counts, latency is always zero.
class ScriptedGateway final : public LlmGateway {
 public:
  struct RecordedCall {
    Transcript transcript;
    DecodingParams decoding;
    CallTag tag;
    std::string response;
  };

  void register_script(TranscriptMatcher matcher, std::string response,
                       std::optional<Usage> usage = std::nullopt);
  /// Serves `responses` in order on successive matches; the last one repeats.
  void register_sequence(TranscriptMatcher matcher, std::vector<std::string> responses,
                         std::optional<Usage> usage = std::nullopt);
  /// Computes the response per call. The responder is copied and invoked
  /// without the lock held, so state kept inside it does not persist.
  void register_responder(TranscriptMatcher matcher, Responder responder,
                          std::optional<Usage> usage = std::nullopt);

  /// Locks the script table. Registering afterwards throws.
  void freeze();

  std::vector<RecordedCall> calls() const;
  std::size_t call_count() const;

  std::string name() const override { return "scripted"; }

  // Matcher builders.
  static TranscriptMatcher any();
  static TranscriptMatcher exact(Transcript transcript);
  static TranscriptMatcher last_contains(std::string needle);
  static TranscriptMatcher any_contains(std::string needle);
  static TranscriptMatcher system_contains(std::string needle);

 protected:
  CompletionResult invoke(const Transcript& transcript, const DecodingParams& decoding,
                          const CallTag& tag) override;

 private:
  struct Script {
    TranscriptMatcher matcher;
    Responder responder;
    std::vector<std::string> sequence;
    std::size_t cursor = 0;
    std::optional<Usage> usage;
  };

  void add(Script script);

  mutable std::mutex mutex_;
  std::vector<Script> scripts_;
  std::vector<RecordedCall> calls_;
  bool frozen_ = false;
};

}  // namespace promptevo::llm
