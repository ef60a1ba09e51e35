#include <gtest/gtest.h>

#include "promptevo/judge/judge.hpp"
#include "promptevo/llm/scripted_gateway.hpp"
#include "promptevo/operators/evolve.hpp"

using namespace promptevo;
using namespace promptevo::judge;
using llm::ScriptedGateway;

TEST(ParseVerdict, ReadsTagCaseInsensitively) {
  auto v = parse_verdict("The list is right. <Judgement> GOOD </judgement>");
  EXPECT_TRUE(v.good());
  EXPECT_EQ(v.explanation, "The list is right.");
  auto b = parse_verdict("<judgment>bad</judgment> it lists similarities");
  EXPECT_FALSE(b.good());
  EXPECT_EQ(b.explanation, "it lists similarities");
  auto first = parse_verdict("<judgement>bad</judgement> <judgement>good</judgement>");
  EXPECT_FALSE(first.good());
}

TEST(ParseVerdict, RejectsUnusableReplies) {
  EXPECT_THROW(parse_verdict("looks good to me"), VerdictParseError);
  EXPECT_THROW(parse_verdict("<judgement>maybe</judgement>"), VerdictParseError);
  EXPECT_THROW(parse_verdict("<judgement>good"), VerdictParseError);
}

TEST(Judge, UnparseableCountsAsBadAndIsGreedy) {
  ScriptedGateway g;
  g.register_script(ScriptedGateway::any(), "no tags here");
  TokenLedger ledger;
  Judge j(g, JudgeConfig{true, 3, kDefaultJudgeInstruction});
  std::size_t index = 99;
  auto v = j.judge({llm::Message::user("ctx")}, "do x", "did x", {Phase::kEvolution, "p", 1}, ledger, &index);
  EXPECT_FALSE(v.good());
  EXPECT_TRUE(v.unparseable);
  EXPECT_EQ(index, 0u);
  EXPECT_EQ(ledger.at(0).phase, Phase::kJudge);
  auto call = g.calls().front();
  EXPECT_TRUE(call.decoding.is_greedy());
  EXPECT_EQ(call.transcript.front().content, kDefaultJudgeInstruction);
  EXPECT_NE(call.transcript.back().content.find("did x"), std::string::npos);
}

TEST(GuardedGenerate, StopsAtFirstGood) {
  int generated = 0;
  std::vector<Decision> script{Decision::kBad, Decision::kBad, Decision::kGood};
  std::size_t judged = 0;
  auto r = guarded_generate([&](int a) { ++generated; return "r" + std::to_string(a); },
                            JudgeConfig{true, 3, "j"},
                            [&](const std::string&) { return Verdict{script[judged++], "", "", false}; });
  EXPECT_EQ(generated, 3);
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.response, "r2");
  EXPECT_EQ(r.attempts, 3);
}

TEST(GuardedGenerate, ExhaustionReturnsLastUnaccepted) {
  int generated = 0;
  auto r = guarded_generate([&](int a) { ++generated; return "r" + std::to_string(a); },
                            JudgeConfig{true, 4, "j"},
                            [](const std::string&) { return Verdict{Decision::kBad, "", "", false}; });
  EXPECT_EQ(generated, 4);
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.response, "r3");
  EXPECT_EQ(r.verdicts.size(), 4u);
}

TEST(GuardedGenerate, DisabledJudgeMakesOneAttempt) {
  int judged = 0;
  auto r = guarded_generate([](int) { return std::string("x"); }, JudgeConfig{false, 3, "j"},
                            [&](const std::string&) { ++judged; return Verdict{}; });
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.attempts, 1);
  EXPECT_EQ(judged, 0);
  EXPECT_THROW(guarded_generate([](int) { return std::string("x"); }, JudgeConfig{true, 0, "j"},
                                [](const std::string&) { return Verdict{}; }),
               std::invalid_argument);
}

// The operator loop wired to a real judge over the mock gateway.
TEST(JudgedOperator, BadBadGoodThenAllBad) {
  const auto p1 = PromptGenome::base("a", "Say yes.");
  const auto p2 = PromptGenome::base("b", "Say no.");
  const auto tmpl = operators::TemplateRegistry::builtin().get("GA", false);

  for (bool all_bad : {false, true}) {
    ScriptedGateway g;
    std::vector<std::string> verdicts = all_bad
        ? std::vector<std::string>{"<judgement>bad</judgement>"}
        : std::vector<std::string>{"<judgement>bad</judgement>", "<judgement>bad</judgement>",
                                   "<judgement>good</judgement>"};
    g.register_sequence(ScriptedGateway::system_contains("You are acting as a judge"), verdicts);
    g.register_sequence(ScriptedGateway::any(),
                        {"<prompt>one</prompt>", "<prompt>two</prompt>", "<prompt>three</prompt>",
                         "<prompt>four</prompt>", "<prompt>five</prompt>"});
    TokenLedger ledger;
    Judge judge(g, JudgeConfig{true, 5, kDefaultJudgeInstruction});
    operators::OperatorContext ctx{g, ledger, &judge};
    std::mt19937_64 rng(2);
    auto out = operators::run_operator(tmpl, {&p1, &p2}, ctx, rng);

    std::size_t operator_calls = 0, judge_calls = 0;
    for (const auto& c : g.calls()) {
      if (c.tag.phase == Phase::kJudge) {
        ++judge_calls;
        EXPECT_TRUE(c.decoding.is_greedy());
      } else {
        ++operator_calls;
        EXPECT_FALSE(c.decoding.is_greedy());
      }
    }
    const std::size_t expected = all_bad ? 5 : 3;
    EXPECT_EQ(operator_calls, expected);
    EXPECT_EQ(judge_calls, expected);
    EXPECT_EQ(out.steps[0].accepted, !all_bad);
    EXPECT_EQ(out.child, all_bad ? "five" : "three");
    EXPECT_EQ(out.steps[0].ledger_indices.size(), 2 * expected);
  }
}
