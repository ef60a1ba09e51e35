#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "promptevo/llm/gateway.hpp"

namespace promptevo::llm {

/// One line of a cassette file.
struct CassetteRecord {
  std::string hash;
  std::string response;
  Usage usage;

  bool operator==(const CassetteRecord&) const = default;
};

std::string to_jsonl(const CassetteRecord& record);
CassetteRecord parse_cassette_line(const std::string& line);
std::vector<CassetteRecord> read_cassette(const std::filesystem::path& path);

/// Forwards to `inner` and appends every exchange to a cassette file.
class RecordingGateway final : public LlmGateway {
 public:
  RecordingGateway(LlmGateway& inner, const std::filesystem::path& path);

  std::string name() const override { return "recording(" + inner_.name() + ")"; }

 protected:
  CompletionResult invoke(const Transcript& transcript, const DecodingParams& decoding,
                          const CallTag& tag) override;

 private:
  LlmGateway& inner_;
  std::mutex mutex_;
  std::ofstream out_;
};

/// Serves responses from a cassette by transcript hash. Records sharing a
/// hash are served in file order; the last one repeats once the rest are used.
class ReplayGateway final : public LlmGateway {
 public:
  explicit ReplayGateway(std::vector<CassetteRecord> records);
  static ReplayGateway from_file(const std::filesystem::path& path);

  std::string name() const override { return "replay"; }

 protected:
  CompletionResult invoke(const Transcript& transcript, const DecodingParams& decoding,
                          const CallTag& tag) override;

 private:
  struct Slot {
    std::vector<CassetteRecord> records;
    std::size_t cursor = 0;
  };
  std::mutex mutex_;
  std::map<std::string, Slot> by_hash_;
};

}  // namespace promptevo::llm
