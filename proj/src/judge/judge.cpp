#include "promptevo/judge/judge.hpp"

#include "promptevo/core/text.hpp"

namespace promptevo::judge {

std::string_view to_string(Decision decision) {
  return decision == Decision::kGood ? "good" : "bad";
}

namespace {

struct TagMatch {
  std::size_t open = std::string::npos;
  std::size_t content = 0;
  std::size_t close = 0;
  std::size_t end = 0;
};

TagMatch find_tag(const std::string& raw) {
  const auto lower = to_lower(raw);
  for (const char* name : {"judgement", "judgment"}) {
    const std::string open = std::string("<") + name + ">";
    const std::string close = std::string("</") + name + ">";
    auto o = lower.find(open);
    if (o == std::string::npos) continue;
    auto c = lower.find(close, o + open.size());
    if (c == std::string::npos) continue;
    return {o, o + open.size(), c, c + close.size()};
  }
  return {};
}

}  // namespace

Verdict parse_verdict(const std::string& raw) {
  auto tag = find_tag(raw);
  if (tag.open == std::string::npos) throw VerdictParseError("no <judgement> tag pair in reply");
  auto token = to_lower(trim(std::string_view(raw).substr(tag.content, tag.close - tag.content)));
  Verdict v;
  v.raw = raw;
  if (token == "good") {
    v.decision = Decision::kGood;
  } else if (token == "bad") {
    v.decision = Decision::kBad;
  } else {
    throw VerdictParseError("judgement tag holds '" + token + "', expected good or bad");
  }
  auto before = trim(std::string_view(raw).substr(0, tag.open));
  auto after = trim(std::string_view(raw).substr(tag.end));
  v.explanation = before.empty() ? after : (after.empty() ? before : before + " " + after);
  return v;
}

std::string render_judge_request(const llm::Transcript& context, const std::string& instruction,
                                 const std::string& response) {
  std::string out = "Context:\n";
  for (const auto& m : context) {
    out += "[";
    out += llm::to_string(m.role);
    out += "]\n";
    out += m.content;
    out += "\n";
  }
  out += "\nInstruction:\n" + instruction + "\n\nResponse:\n" + response;
  return out;
}

Verdict Judge::judge(const llm::Transcript& context, const std::string& instruction,
                     const std::string& response, const llm::CallTag& tag, TokenLedger& ledger,
                     std::size_t* ledger_index) const {
  if (is_blank(response)) throw std::invalid_argument("judge needs a non-empty response");
  llm::Transcript request{llm::Message::system(config_.instruction),
                          llm::Message::user(render_judge_request(context, instruction, response))};
  llm::CallTag judge_tag = tag;
  judge_tag.phase = Phase::kJudge;
  auto call = gateway_.complete(request, llm::DecodingParams::greedy(max_tokens_), judge_tag, ledger);
  if (ledger_index) *ledger_index = call.ledger_index;
  try {
    return parse_verdict(call.result.content);
  } catch (const VerdictParseError&) {
    return Verdict{Decision::kBad, kUnparseableExplanation, call.result.content, true};
  }
}

GuardedResult guarded_generate(const std::function<std::string(int)>& generate,
                               const JudgeConfig& config,
                               const std::function<Verdict(const std::string&)>& judge) {
  GuardedResult result;
  if (!config.enabled) {
    result.response = generate(0);
    result.attempts = 1;
    result.accepted = true;
    return result;
  }
  if (config.max_retries < 1) throw std::invalid_argument("max_retries must be ≥ 1");
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    result.response = generate(attempt);
    result.attempts = attempt + 1;
    result.verdicts.push_back(judge(result.response));
    if (result.verdicts.back().good()) {
      result.accepted = true;
      return result;
    }
  }
  result.accepted = false;
  return result;
}

}  // namespace promptevo::judge
