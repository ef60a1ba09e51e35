#include "promptevo/llm/scripted_gateway.hpp"

#include <algorithm>

namespace promptevo::llm {

void ScriptedGateway::add(Script script) {
  std::lock_guard lock(mutex_);
  if (frozen_) throw std::logic_error("script table is frozen");
  scripts_.push_back(std::move(script));
}

void ScriptedGateway::register_script(TranscriptMatcher matcher, std::string response,
                                      std::optional<Usage> usage) {
  Script s;
  s.matcher = std::move(matcher);
  s.sequence.push_back(std::move(response));
  s.usage = usage;
  add(std::move(s));
}

void ScriptedGateway::register_sequence(TranscriptMatcher matcher,
                                        std::vector<std::string> responses,
                                        std::optional<Usage> usage) {
  if (responses.empty()) throw std::invalid_argument("sequence needs at least one response");
  Script s;
  s.matcher = std::move(matcher);
  s.sequence = std::move(responses);
  s.usage = usage;
  add(std::move(s));
}

void ScriptedGateway::register_responder(TranscriptMatcher matcher, Responder responder,
                                         std::optional<Usage> usage) {
  Script s;
  s.matcher = std::move(matcher);
  s.responder = std::move(responder);
  s.usage = usage;
  add(std::move(s));
}

void ScriptedGateway::freeze() {
  std::lock_guard lock(mutex_);
  frozen_ = true;
}

std::vector<ScriptedGateway::RecordedCall> ScriptedGateway::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t ScriptedGateway::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

CompletionResult ScriptedGateway::invoke(const Transcript& transcript,
                                         const DecodingParams& decoding, const CallTag& tag) {
  std::unique_lock lock(mutex_);
  auto it = std::find_if(scripts_.begin(), scripts_.end(),
                         [&](const Script& s) { return s.matcher(transcript); });
  if (it == scripts_.end()) {
    throw GatewayError(GatewayErrorKind::kUnscripted,
                       "unscripted transcript " + transcript_hash(transcript, decoding));
  }
  std::string response;
  std::optional<Usage> usage = it->usage;
  if (it->responder) {
    auto responder = it->responder;
    // Responders may be slow; they only read their arguments.
    lock.unlock();
    response = responder(transcript, decoding);
    lock.lock();
  } else {
    response = it->sequence[std::min(it->cursor, it->sequence.size() - 1)];
    ++it->cursor;
  }
  calls_.push_back({transcript, decoding, tag, response});
  lock.unlock();

  CompletionResult result;
  result.usage = usage.value_or(word_count_usage(transcript, response));
  result.content = std::move(response);
  result.attempt_latencies.push_back(result.latency);
  return result;
}

TranscriptMatcher ScriptedGateway::any() {
  return [](const Transcript&) { return true; };
}

TranscriptMatcher ScriptedGateway::exact(Transcript expected) {
  return [expected = std::move(expected)](const Transcript& t) { return t == expected; };
}

TranscriptMatcher ScriptedGateway::last_contains(std::string needle) {
  return [needle = std::move(needle)](const Transcript& t) {
    return !t.empty() && t.back().content.find(needle) != std::string::npos;
  };
}

TranscriptMatcher ScriptedGateway::any_contains(std::string needle) {
  return [needle = std::move(needle)](const Transcript& t) {
    return std::any_of(t.begin(), t.end(), [&](const Message& m) {
      return m.content.find(needle) != std::string::npos;
    });
  };
}

TranscriptMatcher ScriptedGateway::system_contains(std::string needle) {
  return [needle = std::move(needle)](const Transcript& t) {
    return !t.empty() && t.front().role == Role::kSystem &&
           t.front().content.find(needle) != std::string::npos;
  };
}

}  // namespace promptevo::llm
