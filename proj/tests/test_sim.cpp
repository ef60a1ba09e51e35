#include <gtest/gtest.h>

#include "promptevo/core/text.hpp"
#include "promptevo/eval/evaluator.hpp"
#include "promptevo/eval/metrics.hpp"
#include "promptevo/sim/synthetic.hpp"

using namespace promptevo;
using promptevo::sim::SyntheticWorld;

TEST(SyntheticWorld, DatasetMeasuresSimilarity) {
  SyntheticWorld world;
  EXPECT_DOUBLE_EQ(world.similarity(world.target()), 1.0);
  EXPECT_EQ(world.dataset().size(), 40u);
  EXPECT_EQ(split_words(world.target()).size(), 10u);

  llm::ScriptedGateway g;
  world.script(g);
  TokenLedger ledger;
  auto task = world.task();
  auto metrics = eval::MetricRegistry::with_builtins();
  eval::Evaluator ev(task, metrics, {}, g, ledger);
  StrategyConfig full;
  full.mode = EvaluationMode::kFull;
  eval::ScoreCache cache;
  // A prompt with the target's words in half the positions scores 0.5.
  auto words = split_words(world.target());
  std::string half;
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto w = i % 2 == 0 ? words[i] : std::string("zzz");
    half += (i ? " " : "") + w;
  }
  auto target = ev.evaluate(PromptGenome::base("t", world.target()), world.dataset(), full, {}, nullptr,
                            nullptr, 0, cache);
  auto partial = ev.evaluate(PromptGenome::base("h", half), world.dataset(), full, {}, nullptr, nullptr, 0, cache);
  EXPECT_DOUBLE_EQ(target.fitness, 1.0);
  EXPECT_DOUBLE_EQ(partial.fitness, world.similarity(half));
  EXPECT_DOUBLE_EQ(world.similarity(half), 0.5);
}

TEST(SyntheticWorld, EditsAreSeededAndStayInVocabulary) {
  SyntheticWorld world;
  const auto& t = world.target();
  EXPECT_EQ(world.mutate(t, 7), world.mutate(t, 7));
  EXPECT_EQ(split_words(world.mutate(t, 8)).size(), 10u);
  auto child = world.crossover(t, world.mutate(t, 3), 11);
  EXPECT_EQ(child, world.crossover(t, world.mutate(t, 3), 11));
  EXPECT_GE(world.similarity(child), world.similarity(world.mutate(t, 3)) - 1e-12);
}
