#include "promptevo/llm/cassette.hpp"

#include <nlohmann/json.hpp>

#include "promptevo/core/text.hpp"

namespace promptevo::llm {

using nlohmann::json;

std::string to_jsonl(const CassetteRecord& r) {
  json j{{"hash", r.hash},
         {"response", r.response},
         {"usage", {{"prompt_tokens", r.usage.prompt_tokens},
                    {"completion_tokens", r.usage.completion_tokens}}}};
  return j.dump();
}

CassetteRecord parse_cassette_line(const std::string& line) {
  auto j = json::parse(line);
  CassetteRecord r;
  r.hash = j.at("hash").get<std::string>();
  r.response = j.at("response").get<std::string>();
  r.usage.prompt_tokens = j.at("usage").at("prompt_tokens").get<std::int64_t>();
  r.usage.completion_tokens = j.at("usage").at("completion_tokens").get<std::int64_t>();
  return r;
}

std::vector<CassetteRecord> read_cassette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cassette " + path.string());
  std::vector<CassetteRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    try {
      records.push_back(parse_cassette_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

RecordingGateway::RecordingGateway(LlmGateway& inner, const std::filesystem::path& path)
    : inner_(inner) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::app);
  if (!out_) throw std::runtime_error("cannot open cassette for writing: " + path.string());
}

CompletionResult RecordingGateway::invoke(const Transcript& transcript,
                                          const DecodingParams& decoding, const CallTag& tag) {
  TokenLedger scratch;  // the outer complete() does the real accounting
  auto call = inner_.complete(transcript, decoding, tag, scratch);
  std::lock_guard lock(mutex_);
  out_ << to_jsonl({transcript_hash(transcript, decoding), call.result.content, call.result.usage})
       << '\n';
  out_.flush();
  return call.result;
}

ReplayGateway::ReplayGateway(std::vector<CassetteRecord> records) {
  for (auto& r : records) by_hash_[r.hash].records.push_back(std::move(r));
}

ReplayGateway ReplayGateway::from_file(const std::filesystem::path& path) {
  return ReplayGateway(read_cassette(path));
}

CompletionResult ReplayGateway::invoke(const Transcript& transcript,
                                       const DecodingParams& decoding, const CallTag&) {
  auto hash = transcript_hash(transcript, decoding);
  std::lock_guard lock(mutex_);
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end())
    throw GatewayError(GatewayErrorKind::kUnscripted, "unscripted transcript " + hash +
                                                          " (no cassette record)");
  auto& slot = it->second;
  const auto& record = slot.records[std::min(slot.cursor, slot.records.size() - 1)];
  ++slot.cursor;
  CompletionResult result;
  result.content = record.response;
  result.usage = record.usage;
  result.attempt_latencies.push_back(result.latency);
  return result;
}

}  // namespace promptevo::llm
