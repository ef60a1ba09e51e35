#include "promptevo/llm/openai_gateway.hpp"

#include <httplib.h>

#include <cstdlib>
#include <nlohmann/json.hpp>

namespace promptevo::llm {

namespace {

using nlohmann::json;

std::int64_t estimate_tokens(std::size_t chars) {
  return static_cast<std::int64_t>((chars + 3) / 4);
}

bool mentions_context_length(const std::string& body) {
  return body.find("context_length_exceeded") != std::string::npos ||
         body.find("maximum context length") != std::string::npos;
}

}  // namespace

OpenAiGateway::OpenAiGateway(OpenAiConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  auto scheme_end = config_.base_url.find("://");
  if (scheme_end == std::string::npos)
    throw std::invalid_argument("base_url needs a scheme: " + config_.base_url);
  auto path_start = config_.base_url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.base_url.substr(0, path_start);
  if (path_start != std::string::npos) path_prefix_ = config_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
  }
}

std::string OpenAiGateway::request_body(const Transcript& transcript,
                                        const DecodingParams& decoding) const {
  json body;
  body["model"] = config_.model;
  body["messages"] = json::array();
  for (const auto& m : transcript)
    body["messages"].push_back({{"role", to_string(m.role)}, {"content", m.content}});
  body["temperature"] = decoding.temperature.value_or(0.0);
  if (decoding.seed) body["seed"] = *decoding.seed;
  body["max_tokens"] = decoding.max_tokens;
  body["stream"] = false;
  return body.dump();
}

CompletionResult parse_chat_completion(const std::string& body, const Transcript& transcript) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "response body is not JSON");
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty())
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "response has no choices");
  const auto& first = (*choices)[0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string())
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "choice has no message content");

  CompletionResult result;
  result.content = first["message"]["content"].get<std::string>();
  auto usage = doc.find("usage");
  if (usage != doc.end() && usage->is_object() && usage->contains("prompt_tokens") &&
      usage->contains("completion_tokens")) {
    result.usage.prompt_tokens = (*usage)["prompt_tokens"].get<std::int64_t>();
    result.usage.completion_tokens = (*usage)["completion_tokens"].get<std::int64_t>();
  } else {
    std::size_t chars = 0;
    for (const auto& m : transcript) chars += m.content.size();
    result.usage.prompt_tokens = estimate_tokens(chars);
    result.usage.completion_tokens = estimate_tokens(result.content.size());
  }
  if (result.usage.prompt_tokens < 0 || result.usage.completion_tokens < 0)
    throw GatewayError(GatewayErrorKind::kMalformedResponse, "negative token usage");
  return result;
}

CompletionResult OpenAiGateway::attempt(const std::string& body,
                                        const Transcript& transcript) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
  if (!res) {
    throw GatewayError(GatewayErrorKind::kTransport,
                       "request to " + scheme_host_port_ + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429)
    throw GatewayError(GatewayErrorKind::kRateLimit, "rate limited (HTTP 429)");
  if (res->status >= 500)
    throw GatewayError(GatewayErrorKind::kTransport, "server error HTTP " + std::to_string(res->status));
  if (res->status >= 400) {
    if (mentions_context_length(res->body))
      throw GatewayError(GatewayErrorKind::kContextLength, "context length exceeded: " + res->body);
    throw GatewayError(GatewayErrorKind::kRequest,
                       "request rejected HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  return parse_chat_completion(res->body, transcript);
}

CompletionResult OpenAiGateway::invoke(const Transcript& transcript,
                                       const DecodingParams& decoding, const CallTag&) {
  const auto body = request_body(transcript, decoding);
  std::vector<std::chrono::milliseconds> latencies;
  auto timed = [&](int) {
    auto start = std::chrono::steady_clock::now();
    auto record = [&] {
      latencies.push_back(std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start));
    };
    try {
      auto result = attempt(body, transcript);
      record();
      return result;
    } catch (...) {
      record();
      throw;
    }
  };
  auto result = with_retry(config_.retry, sleeper_, timed);
  result.attempt_latencies = latencies;
  result.latency = std::chrono::milliseconds(0);
  for (auto l : latencies) result.latency += l;
  return result;
}

}  // namespace promptevo::llm
