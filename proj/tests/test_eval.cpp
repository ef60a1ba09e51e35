#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "oracle.hpp"
#include "promptevo/eval/dataset.hpp"
#include "promptevo/eval/evaluator.hpp"
#include "promptevo/eval/metrics.hpp"
#include "promptevo/eval/ordering.hpp"
#include "promptevo/eval/stopping.hpp"
#include "promptevo/eval/trace.hpp"
#include "promptevo/llm/scripted_gateway.hpp"
#include "promptevo/serialization.hpp"
#include "support.hpp"

using namespace promptevo;
using namespace promptevo::eval;

namespace {

SampleScoreTrace trace_of(const std::string& id, const std::vector<double>& scores, std::size_t offset = 0) {
  SampleScoreTrace t(id);
  for (std::size_t i = 0; i < scores.size(); ++i) t.push(promptevo::testing::sample_id(i + offset), scores[i]);
  return t;
}

oracle::Stream stream_of(const SampleScoreTrace& t) {
  oracle::Stream s;
  for (const auto& e : t.entries()) s.emplace_back(e.sample_id, e.score);
  return s;
}

oracle::ScoreMap map_of(const SampleScoreTrace& t) {
  oracle::ScoreMap m;
  for (const auto& e : t.entries()) m[e.sample_id] = e.score;
  return m;
}

}  // namespace

TEST(Metrics, ExtractLabelEarliestWins) {
  std::vector<std::string> v{"positive", "negative"};
  EXPECT_EQ(extract_label("It is NEGATIVE, not positive", v), "negative");
  EXPECT_EQ(extract_label("nothing", v), std::nullopt);
}

TEST(Metrics, TokenF1MatchesHandCount) {
  // prediction "the cat sat", reference "the cat sat down": common 3,
  // precision 3/3, recall 3/4, F1 = 2 * 1 * 0.75 / 1.75.
  EXPECT_DOUBLE_EQ(token_f1("The cat sat.", "the cat sat down"), 2.0 * 0.75 / 1.75);
  EXPECT_DOUBLE_EQ(token_f1("a b", "c d"), 0.0);
  EXPECT_DOUBLE_EQ(token_f1("", ""), 1.0);
  // prediction with 4 tokens sharing 4 of 6 reference tokens: P 1, R 2/3, F1 0.8
  EXPECT_DOUBLE_EQ(token_f1("w x y z", "w x y z u v"), 0.8);
}

TEST(Metrics, ScoreOutputByKind) {
  auto task = promptevo::testing::sentiment_task();
  auto metrics = MetricRegistry::with_builtins(task.verbalizers);
  auto s = Sample::make("a", "great film", {}, "positive");
  EXPECT_EQ(score_output(task, metrics, "Positive.", s), 1.0);
  EXPECT_EQ(score_output(task, metrics, "negative", s), 0.0);
  task.kind = TaskKind::kExtractiveQa;
  auto qa = Sample::make("q", "who?", {"Ada Lovelace", "Lovelace"});
  EXPECT_DOUBLE_EQ(score_output(task, metrics, "lovelace", qa), 1.0);
  task.kind = TaskKind::kGeneration;
  task.metric = "exact_match";
  EXPECT_EQ(score_output(task, metrics, "Ada lovelace!", qa), 1.0);
}

TEST(Trace, RunningMeansByPrefixSums) {
  auto t = trace_of("p", {1, 0, 1});
  ASSERT_EQ(t.running_means().size(), 3u);
  EXPECT_DOUBLE_EQ(t.mean_at(1), 1.0);
  EXPECT_DOUBLE_EQ(t.mean_at(2), 0.5);
  EXPECT_DOUBLE_EQ(t.mean_at(3), 2.0 / 3.0);
  EXPECT_EQ(t.score_of("s001"), 0.0);
  EXPECT_EQ(t.score_of("s009"), std::nullopt);
  EXPECT_THROW(t.push("s000", 1.0), std::invalid_argument);
  EXPECT_THROW(t.push("s010", 1.5), std::domain_error);
  json j = t;
  EXPECT_EQ(j.get<SampleScoreTrace>(), t);
}

TEST(MomentStop, NeverBeforePatienceOrWindow) {
  std::vector<double> flat(30, 0.5);
  for (std::size_t n = 1; n <= 20; ++n)
    EXPECT_FALSE(moment_stop(std::span<const double>(flat.data(), n), 1e-3, 10, 20));
  EXPECT_TRUE(moment_stop(std::span<const double>(flat.data(), 21), 1e-3, 10, 20));
  EXPECT_FALSE(moment_stop(std::span<const double>(flat.data(), 10), 1e-3, 10, 0));  // n < w + 1
  EXPECT_TRUE(moment_stop(std::span<const double>(flat.data(), 11), 1e-3, 10, 0));
}

TEST(ParentStop, IdenticalChildStopsAtTwentyOne) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution coin(0.6);
  std::vector<double> scores;
  for (int i = 0; i < 200; ++i) scores.push_back(coin(rng) ? 1.0 : 0.0);
  auto parent = trace_of("p", scores);
  StrategyConfig c;
  StoppingMonitor monitor(c, {&parent});
  std::optional<StopReason> fired;
  std::size_t n = 0;
  while (!fired) {
    fired = monitor.observe(promptevo::testing::sample_id(n), scores[n]);
    ++n;
  }
  EXPECT_EQ(n, 21u);
  EXPECT_EQ(*fired, StopReason::kParent);
}

TEST(ParentStop, ChildAheadOfParentsKeepsGoing) {
  auto parent = trace_of("p", std::vector<double>(200, 0.5));
  std::vector<double> child(200, 0.6);  // running mean 0.1 above the parent everywhere
  auto c = trace_of("c", child);
  for (std::size_t n = 21; n <= 200; n += 17) {
    SampleScoreTrace prefix("c");
    for (std::size_t i = 0; i < n; ++i) prefix.push(promptevo::testing::sample_id(i), child[i]);
    EXPECT_FALSE(parent_stop(prefix, {&parent}, 1e-3, 10, 20, 1e-3)) << n;
  }
}

TEST(ParentStop, IncompleteParentDefersToMoment) {
  auto parent = trace_of("p", std::vector<double>(25, 0.0));
  // Child scores 1 everywhere: far above the parent, so only the moment rule
  // can stop it, and it can only do so once the parent's coverage ends.
  auto child = trace_of("c", std::vector<double>(40, 1.0));
  StrategyConfig c;
  StoppingMonitor m(c, {&parent});
  std::vector<std::optional<StopReason>> got;
  for (const auto& e : child.entries()) got.push_back(m.observe(e.sample_id, e.score));
  for (std::size_t n = 1; n <= 25; ++n) EXPECT_FALSE(got[n - 1]) << n;
  EXPECT_EQ(got[25], StopReason::kMoment);  // n = 26: window 17..26 lacks parent means
}

// Incremental decisions equal the brute-force oracle at every prefix, across
// random child streams and partially covering parents.
TEST(StoppingOracle, IncrementalEqualsBruteForce) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 3);
  for (int run = 0; run < 60; ++run) {
    StrategyConfig c;
    c.eta_m = std::vector<double>{1e-3, 5e-3, 2e-2}[run % 3];
    c.eta_p = std::vector<double>{1e-3, 0.0, 5e-2}[run % 3];
    c.window = 1 + run % 12;
    c.patience = run % 25;
    const std::size_t len = 120;
    std::vector<double> scores;
    for (std::size_t i = 0; i < len; ++i) {
      switch (kind(rng)) {
        case 0: scores.push_back(1.0); break;
        case 1: scores.push_back(0.0); break;
        default: scores.push_back(std::round(unit(rng) * 8) / 8);
      }
    }
    SampleScoreTrace child("c");
    std::vector<std::size_t> perm(len);
    for (std::size_t i = 0; i < len; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t i = 0; i < len; ++i) child.push(promptevo::testing::sample_id(perm[i]), scores[i]);

    std::vector<SampleScoreTrace> parents;
    for (int p = 0; p < (run % 3); ++p) {
      SampleScoreTrace t("p" + std::to_string(p));
      const std::size_t covered = run % 2 == 0 ? len : 30 + static_cast<std::size_t>(unit(rng) * 80);
      for (std::size_t i = 0; i < covered; ++i) t.push(promptevo::testing::sample_id(i), unit(rng));
      parents.push_back(std::move(t));
    }
    std::vector<const SampleScoreTrace*> ptrs;
    std::vector<oracle::ScoreMap> maps;
    for (const auto& p : parents) {
      ptrs.push_back(&p);
      maps.push_back(map_of(p));
    }
    StoppingMonitor monitor(c, ptrs);
    const auto s = stream_of(child);
    for (std::size_t n = 1; n <= len; ++n) {
      auto got = monitor.observe(s[n - 1].first, s[n - 1].second);
      ASSERT_EQ(got, oracle::decision(s, maps, n, c)) << "run " << run << " n " << n;
    }
  }
}

TEST(Ordering, PermutationsWithDeterministicTies) {
  std::vector<Sample> data{Sample::make("b", "xx", {"r"}), Sample::make("a", "yy", {"r"}),
                           Sample::make("c", "\xC3\xA9", {"r"}), Sample::make("d", "zzz", {"r"})};
  EXPECT_EQ(order_samples(data, SampleOrdering::kNatural), (std::vector<std::string>{"b", "a", "c", "d"}));
  // "é" is one code point although two bytes.
  EXPECT_EQ(order_samples(data, SampleOrdering::kShortestFirst),
            (std::vector<std::string>{"c", "a", "b", "d"}));
  SampleScoreTrace parent("p");
  parent.push("d", 0.0);
  parent.push("b", 1.0);
  parent.push("a", 0.0);
  EXPECT_EQ(order_samples(data, SampleOrdering::kHardestFirst, &parent),
            (std::vector<std::string>{"a", "d", "b", "c"}));
  EXPECT_EQ(order_samples(data, SampleOrdering::kHardestFirst, nullptr),
            order_samples(data, SampleOrdering::kNatural));
  for (auto o : {SampleOrdering::kNatural, SampleOrdering::kShortestFirst, SampleOrdering::kHardestFirst}) {
    auto ids = order_samples(data, o, &parent);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), data.size());
  }
}

TEST(Cost, FullCostIsTheProduct) {
  EXPECT_EQ(cost_full(1, 200, 10, 10), 20000);
  EXPECT_EQ(cost_full(10, 200, 10, 10), 200000);
  EXPECT_EQ(cost_full(0, 200, 10, 10), 0);
  EXPECT_EQ(cost_full(7, 200, 10, 0), 0);
  EXPECT_THROW(cost_full(-1, 1, 1, 1), std::invalid_argument);
}

TEST(Subsample, SizeAndDraw) {
  EXPECT_EQ(subsample_size(1.0 / 3.0, 200), 67u);
  EXPECT_EQ(subsample_size(0.5, 3), 2u);
  EXPECT_EQ(subsample_size(0.001, 10), 1u);
  EXPECT_THROW(subsample_size(0.0, 10), std::invalid_argument);
  auto data = promptevo::testing::reviews(200);
  std::mt19937_64 a(7), b(7);
  auto da = draw_subsample(data, 1.0 / 3.0, a);
  EXPECT_EQ(da.size(), 67u);
  EXPECT_EQ(da, draw_subsample(data, 1.0 / 3.0, b));
  EXPECT_TRUE(std::is_sorted(da.begin(), da.end()));
  EXPECT_EQ(std::set<std::string>(da.begin(), da.end()).size(), 67u);
}

class EvaluatorTest : public ::testing::Test {
 protected:
  void SetUp() override {
    data = promptevo::testing::reviews(200);
    std::mt19937_64 rng(11);
    std::bernoulli_distribution coin(0.7);
    for (int i = 0; i < 200; ++i) correct.push_back(coin(rng));
    promptevo::testing::script_table_world(gateway, correct, Usage{5, 1});
    demos = {data[1], data[0]};
  }

  Evaluator evaluator() { return Evaluator(task, metrics, demos, gateway, ledger); }

  TaskSpec task = promptevo::testing::sentiment_task();
  MetricRegistry metrics = MetricRegistry::with_builtins(task.verbalizers);
  std::vector<Sample> data;
  std::vector<Sample> demos;
  std::vector<bool> correct;
  llm::ScriptedGateway gateway;
  TokenLedger ledger;
};

TEST_F(EvaluatorTest, RenderShowsDemonstrationsThenInput) {
  auto t = render_evaluation("Classify.", demos, data[4]);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].content,
            "Classify.\n\nInput: review 1\nOutput: negative\n\nInput: review 0\nOutput: positive"
            "\n\nInput: review 4\nOutput:");
}

TEST_F(EvaluatorTest, FullModeScoresEverySampleGreedily) {
  auto ev = evaluator();
  ScoreCache cache;
  StrategyConfig full;
  full.mode = EvaluationMode::kFull;
  auto r = ev.evaluate(PromptGenome::base("p", "Classify."), data, full, {}, nullptr, nullptr, 0, cache);
  EXPECT_EQ(r.samples_used, 200u);
  EXPECT_EQ(r.stop_reason, StopReason::kExhausted);
  EXPECT_TRUE(r.trace.complete());
  double expected = 0.0;
  for (bool c : correct) expected += c ? 1.0 : 0.0;
  EXPECT_DOUBLE_EQ(r.fitness, expected / 200.0);
  EXPECT_EQ(r.calls, 200u);
  EXPECT_EQ(r.tokens, (Usage{1000, 200}));
  for (const auto& c : gateway.calls()) EXPECT_TRUE(c.decoding.is_greedy());
  EXPECT_EQ(ledger.total(Phase::kEvaluation).calls, 200u);
}

TEST_F(EvaluatorTest, ChildEqualToParentStopsAtTwentyOne) {
  auto ev = evaluator();
  ScoreCache cache;
  StrategyConfig full;
  full.mode = EvaluationMode::kFull;
  auto parent = ev.evaluate(PromptGenome::base("p", "Classify."), data, full, {}, nullptr, nullptr, 0, cache);
  StrategyConfig es;
  auto child = ev.evaluate(PromptGenome::evolved("c", "Sort.", 1, {"p", "p"}, "GA"), data, es,
                           {&parent.trace}, &parent.trace, nullptr, 1, cache);
  EXPECT_EQ(child.samples_used, 21u);
  EXPECT_EQ(child.stop_reason, StopReason::kParent);
  EXPECT_FALSE(child.trace.complete());
  EXPECT_DOUBLE_EQ(static_cast<double>(child.samples_used) / 200.0, 0.105);
}

TEST_F(EvaluatorTest, SubsampleScoresTheFixedDraw) {
  auto ev = evaluator();
  ScoreCache cache;
  std::mt19937_64 rng(3);
  auto draw = draw_subsample(data, 1.0 / 3.0, rng);
  StrategyConfig sub;
  sub.mode = EvaluationMode::kSubsample;
  auto r = ev.evaluate(PromptGenome::base("p", "Classify."), data, sub, {}, nullptr, &draw, 0, cache);
  EXPECT_EQ(r.samples_used, 67u);
  EXPECT_EQ(r.stop_reason, StopReason::kSubsample);
  EXPECT_THROW(ev.evaluate(PromptGenome::base("q", "x"), data, sub, {}, nullptr, nullptr, 0, cache),
               std::invalid_argument);
}

TEST_F(EvaluatorTest, CacheMeansNoRepeatCalls) {
  auto ev = evaluator();
  ScoreCache cache;
  StrategyConfig es;
  auto prompt = PromptGenome::base("p", "Classify.");
  auto first = ev.evaluate(prompt, data, es, {}, nullptr, nullptr, 0, cache);
  const auto calls = gateway.call_count();
  auto again = ev.evaluate(prompt, data, es, {}, nullptr, nullptr, 0, cache);
  EXPECT_EQ(gateway.call_count(), calls);
  EXPECT_EQ(again.calls, 0u);
  EXPECT_EQ(again.trace, first.trace);
  StrategyConfig full;
  full.mode = EvaluationMode::kFull;
  auto all = ev.evaluate(prompt, data, full, {}, nullptr, nullptr, 0, cache);
  EXPECT_EQ(gateway.call_count(), calls + (200 - first.samples_used));
  EXPECT_LE(first.samples_used, all.samples_used);
}

TEST_F(EvaluatorTest, GatewayFailureLeavesPartialScoresCached) {
  llm::ScriptedGateway flaky;
  flaky.register_sequence(llm::ScriptedGateway::last_contains("review 0\nOutput:"), {"positive"});
  flaky.register_sequence(llm::ScriptedGateway::last_contains("review 1\nOutput:"), {"negative"});
  Evaluator ev(task, metrics, {}, flaky, ledger);
  ScoreCache cache;
  StrategyConfig full;
  full.mode = EvaluationMode::kFull;
  EXPECT_THROW(ev.evaluate(PromptGenome::base("p", "x"), data, full, {}, nullptr, nullptr, 0, cache),
               llm::GatewayError);
  EXPECT_EQ(cache["p"].size(), 2u);
}

TEST(Dataset, LoadsAndValidates) {
  auto dir = std::filesystem::temp_directory_path() / "promptevo_dataset_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "d.jsonl";
  {
    std::ofstream out(path);
    out << R"({"id":"a","input":"good film","label":"positive"})" << "\n\n";
    out << R"({"id":"b","input":"bad film","references":["negative"],"label":"negative"})" << "\n";
  }
  auto task = promptevo::testing::sentiment_task();
  auto samples = load_samples(path, task);
  ASSERT_EQ(samples.size(), 2u);
  EXPECT_EQ(samples[0].references, std::vector<std::string>{"positive"});

  {
    std::ofstream out(path);
    out << R"({"id":"a","input":"x","label":"positive"})" << "\n";
    out << R"({"id":"b","input":"y","label":"neutral"})" << "\n";
  }
  try {
    load_samples(path, task);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find("neutral"), std::string::npos);
  }
  {
    std::ofstream out(path);
    out << R"({"id":"a","input":"x","label":"positive"})" << "\n";
    out << "not json\n";
  }
  try {
    load_samples(path, task);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
  std::vector<Sample> dup{Sample::make("a", "x", {}, "positive"), Sample::make("a", "y", {}, "negative")};
  EXPECT_THROW(validate_samples(dup, task), DatasetError);
  std::filesystem::remove_all(dir);
}
