#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "promptevo/core/config.hpp"
#include "promptevo/core/ledger.hpp"
#include "promptevo/llm/gateway.hpp"

namespace promptevo::judge {

enum class Decision { kGood, kBad };

std::string_view to_string(Decision decision);

struct Verdict {
  Decision decision = Decision::kBad;
  std::string explanation;
  std::string raw;
  /// Set when the reply carried no usable tag and was counted as Bad.
  bool unparseable = false;

  bool good() const { return decision == Decision::kGood; }
  bool operator==(const Verdict&) const = default;
};

struct JudgeConfig {
  bool enabled = false;
  int max_retries = kDefaultJudgeRetries;
  std::string instruction = kDefaultJudgeInstruction;
};

class VerdictParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads the decision from the first <judgement>...</judgement> pair
/// (case-insensitive); the text around the pair becomes the explanation.
Verdict parse_verdict(const std::string& raw);

inline constexpr const char* kUnparseableExplanation = "unparseable judgement";

/// Formats the judge's user message: context transcript, instruction, response.
std::string render_judge_request(const llm::Transcript& context, const std::string& instruction,
                                 const std::string& response);

/// LLM-as-judge over operator step outputs. Always decodes greedily.
class Judge {
 public:
  Judge(llm::LlmGateway& gateway, JudgeConfig config, int max_tokens = kDefaultMaxTokens)
      : gateway_(gateway), config_(std::move(config)), max_tokens_(max_tokens) {}

  /// One gateway call. Unparseable replies yield a Bad verdict flagged `unparseable`.
  Verdict judge(const llm::Transcript& context, const std::string& instruction,
                const std::string& response, const llm::CallTag& tag, TokenLedger& ledger,
                std::size_t* ledger_index = nullptr) const;

  const JudgeConfig& config() const { return config_; }

 private:
  llm::LlmGateway& gateway_;
  JudgeConfig config_;
  int max_tokens_;
};

struct GuardedResult {
  std::string response;
  int attempts = 0;
  std::vector<Verdict> verdicts;
  bool accepted = false;
};

/// Regenerates while the judge says Bad, at most `config.max_retries`
/// attempts. On exhaustion the last response is returned unaccepted. With the
/// judge disabled a single attempt is made and accepted without a verdict.
/// Exceptions from either closure propagate immediately.
GuardedResult guarded_generate(const std::function<std::string(int attempt)>& generate,
                               const JudgeConfig& config,
                               const std::function<Verdict(const std::string&)>& judge);

}  // namespace promptevo::judge
