#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "promptevo/llm/scripted_gateway.hpp"
#include "promptevo/operators/evolve.hpp"
#include "promptevo/operators/extract.hpp"
#include "promptevo/operators/population.hpp"
#include "promptevo/operators/templates.hpp"
#include "promptevo/serialization.hpp"
#include "support.hpp"

using namespace promptevo;
using namespace promptevo::operators;
using llm::Message;
using llm::Role;
using llm::ScriptedGateway;

namespace {

const auto kP1 = PromptGenome::base("a", "Classify the review as negative or positive.");
const auto kP2 = PromptGenome::base("b", "Tell whether the text is negative or positive.");
const auto kBest = PromptGenome::base("c", "Is this review negative or positive?");
const auto kBase = PromptGenome::base("d", "Label the sentiment.");

OperatorParents de_parents() { return {&kP1, &kP2, &kBest, &kBase}; }

std::vector<EvolutionStepRecord> fake_prior(std::size_t t) {
  std::vector<EvolutionStepRecord> prior;
  for (std::size_t k = 0; k < t; ++k) {
    EvolutionStepRecord r;
    r.step = k;
    r.instruction = "instruction " + std::to_string(k);
    r.response = "response " + std::to_string(k);
    prior.push_back(r);
  }
  return prior;
}

}  // namespace

TEST(Placeholders, ScanAndRender) {
  EXPECT_EQ(placeholders("a {x} {{y}} {z_1}"), (std::vector<std::string>{"x", "z_1"}));
  EXPECT_EQ(render_instruction("P: {p} {{lit}}", {{"p", "v"}}), "P: v {lit}");
  EXPECT_THROW(render_instruction("{missing}", {}), TemplateError);
  EXPECT_EQ(render_instruction("{not closed", {}), "{not closed");
}

TEST(Templates, BuiltinsAreValidWithExpectedStepCounts) {
  auto r = TemplateRegistry::builtin();
  for (const auto& v : {"DE", "DE1", "DE2"}) {
    EXPECT_EQ(r.get(v, true).steps.size(), 4u);
    EXPECT_EQ(r.get(v, false).steps.size(), 1u);
  }
  for (const auto& v : {"GA", "GA1"}) {
    EXPECT_EQ(r.get(v, true).steps.size(), 2u);
    EXPECT_EQ(r.get(v, false).steps.size(), 1u);
  }
  EXPECT_EQ(r.versions(), (std::vector<std::string>{"DE", "DE1", "DE2", "GA", "GA1"}));
  EXPECT_THROW(r.get("GA7", true), TemplateError);
}

TEST(Templates, RefinedDeStepOneCarriesClauses) {
  auto r = TemplateRegistry::builtin();
  const auto& de = r.get("DE", true).steps[0].instruction;
  const auto& de1 = r.get("DE1", true).steps[0].instruction;
  const auto& de2 = r.get("DE2", true).steps[0].instruction;
  EXPECT_EQ(de.find(kDifferencesAsPhrasesClause), std::string::npos);
  EXPECT_NE(de1.find(kDifferencesAsPhrasesClause), std::string::npos);
  EXPECT_EQ(de1.find(kNoSimilaritiesClause), std::string::npos);
  EXPECT_NE(de2.find(kDifferencesAsPhrasesClause), std::string::npos);
  EXPECT_NE(de2.find(kNoSimilaritiesClause), std::string::npos);
  // Later steps are untouched by the refinement.
  for (std::size_t t = 1; t < 4; ++t)
    EXPECT_EQ(r.get("DE", true).steps[t], r.get("DE2", true).steps[t]);
}

TEST(Templates, ValidationRejectsStructuralErrors) {
  auto t = TemplateRegistry::builtin().get("GA", true);
  auto wrong_count = t;
  wrong_count.steps.pop_back();
  EXPECT_THROW(validate_template(wrong_count), TemplateError);
  auto bad_placeholder = t;
  bad_placeholder.steps[0].instruction += " {best_prompt}";
  EXPECT_THROW(validate_template(bad_placeholder), TemplateError);
  auto empty = t;
  empty.steps[1].instruction.clear();
  EXPECT_THROW(validate_template(empty), TemplateError);
  auto de = TemplateRegistry::builtin().get("DE", true);
  de.steps[2].instruction += " {best_prompt} {base_prompt}";
  EXPECT_NO_THROW(validate_template(de));
}

TEST(Templates, ExportLoadRoundTrip) {
  auto dir = std::filesystem::temp_directory_path() / "promptevo_templates_rt";
  std::filesystem::remove_all(dir);
  auto builtin = TemplateRegistry::builtin();
  builtin.export_directory(dir);
  EXPECT_EQ(TemplateRegistry::load_directory(dir, false), builtin);

  auto edited = builtin.get("GA", true);
  edited.steps[1].instruction = "Step 2: Mutate it and wrap the result in <prompt></prompt>.";
  TemplateRegistry one;
  one.put(edited);
  std::filesystem::remove_all(dir);
  one.export_directory(dir);
  auto merged = TemplateRegistry::load_directory(dir);
  EXPECT_EQ(merged.get("GA", true), edited);
  EXPECT_EQ(merged.get("DE", true), builtin.get("DE", true));
  std::filesystem::remove_all(dir);
}

TEST(Templates, ShippedFilesEqualBuiltins) {
  const std::filesystem::path dir = PROMPTEVO_SOURCE_DIR "/templates";
  ASSERT_TRUE(std::filesystem::exists(dir));
  EXPECT_EQ(TemplateRegistry::load_directory(dir, false), TemplateRegistry::builtin());
}

TEST(Templates, RegistryJsonRoundTrip) {
  auto r = TemplateRegistry::builtin();
  EXPECT_EQ(registry_from_json(registry_to_json(r)), r);
}

// Every step's post-demonstration tail is i_0, r_0, ..., i_{t-1}, r_{t-1}, i_t.
TEST(CoiTranscript, TailHasTwoTPlusOneMessages) {
  auto registry = TemplateRegistry::builtin();
  for (const auto& version : {"DE", "DE1", "DE2", "GA", "GA1"}) {
    const auto& tmpl = registry.get(version, true);
    const auto bindings = make_bindings(tmpl.algorithm, de_parents());
    for (std::size_t t = 0; t < tmpl.steps.size(); ++t) {
      auto prior = fake_prior(t);
      auto transcript = build_coi_transcript(tmpl, t, prior, bindings);
      const auto prefix = transcript_prefix_size(tmpl, t);
      ASSERT_EQ(transcript.size() - prefix, 2 * t + 1) << version << " step " << t;

      std::vector<Message> expected_tail;
      for (const auto& r : prior) {
        expected_tail.push_back(Message::user(r.instruction));
        expected_tail.push_back(Message::assistant(r.response));
      }
      expected_tail.push_back(Message::user(render_instruction(tmpl.steps[t].instruction, bindings)));
      EXPECT_TRUE(std::equal(expected_tail.begin(), expected_tail.end(),
                             transcript.begin() + static_cast<std::ptrdiff_t>(prefix)));
      // Demonstrations stop at step t: no later step's example leaks in.
      for (std::size_t later = t + 1; later < tmpl.steps.size(); ++later)
        for (const auto& d : tmpl.steps[later].demonstrations)
          for (const auto& m : transcript) EXPECT_NE(m.content, d.response);
    }
  }
}

TEST(CoiTranscript, PriorCountMustMatchStep) {
  const auto tmpl = TemplateRegistry::builtin().get("DE", true);
  auto b = make_bindings(Algorithm::kDE, de_parents());
  EXPECT_THROW(build_coi_transcript(tmpl, 2, fake_prior(1), b), std::invalid_argument);
  EXPECT_THROW(build_coi_transcript(tmpl, 4, fake_prior(4), b), std::out_of_range);
}

TEST(CoiTranscript, DeStepOneMatchesGoldenFile) {
  const auto tmpl = TemplateRegistry::builtin().get("DE", true);
  auto transcript = build_coi_transcript(tmpl, 0, {}, make_bindings(Algorithm::kDE, de_parents()));
  std::ifstream in(PROMPTEVO_SOURCE_DIR "/tests/golden/de_step1_transcript.json");
  ASSERT_TRUE(in.good());
  auto golden = json::parse(in);
  ASSERT_EQ(golden.size(), transcript.size());
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    EXPECT_EQ(golden[i]["role"], llm::to_string(transcript[i].role));
    EXPECT_EQ(golden[i]["content"], transcript[i].content);
  }
  const auto& last = golden.back()["content"].get<std::string>();
  EXPECT_NE(last.find("Identify the different parts between Prompt 1 and Prompt 2"), std::string::npos);
  EXPECT_NE(last.find("Prompt 1: " + kP1.text()), std::string::npos);
  EXPECT_NE(last.find("Prompt 2: " + kP2.text()), std::string::npos);
}

TEST(Extract, PromptTagsWin) {
  EXPECT_EQ(extract_final_prompt("blah\n<prompt> Do X. </prompt>\nmore"), "Do X.");
  EXPECT_EQ(extract_final_prompt("<prompt>a</prompt> then <PROMPT>b</PROMPT>"), "b");
}

TEST(Extract, FallsBackToLastLine) {
  EXPECT_EQ(extract_final_prompt("Steps...\n\nFinal prompt: \"Sort the reviews.\"\n"), "Sort the reviews.");
  EXPECT_EQ(extract_final_prompt("1. first\n2. Pick the label."), "Pick the label.");
  EXPECT_EQ(extract_final_prompt("- 'quoted'"), "quoted");
  EXPECT_EQ(extract_final_prompt("<prompt>unclosed answer"), "unclosed answer");
  EXPECT_THROW(extract_final_prompt("   \n  "), ExtractionError);
  EXPECT_THROW(extract_final_prompt("<prompt></prompt>"), ExtractionError);
}

TEST(RunOperator, DeChainCallsOncePerStepWithGrowingTranscript) {
  ScriptedGateway g;
  g.register_sequence(ScriptedGateway::any(),
                      {"Different parts: x", "Mutated: y", "New prompt: z", "<prompt>Final child.</prompt>"});
  TokenLedger ledger;
  OperatorContext ctx{g, ledger};
  std::mt19937_64 rng(3);
  const auto tmpl = TemplateRegistry::builtin().get("DE", true);
  std::vector<std::size_t> before;
  OperatorHooks hooks;
  hooks.before_step = [&](std::size_t t) { before.push_back(t); };
  auto out = run_operator(tmpl, de_parents(), ctx, rng, hooks);
  EXPECT_EQ(out.child, "Final child.");
  ASSERT_EQ(out.steps.size(), 4u);
  EXPECT_EQ(before, (std::vector<std::size_t>{0, 1, 2, 3}));
  auto calls = g.calls();
  ASSERT_EQ(calls.size(), 4u);
  for (std::size_t t = 0; t < 4; ++t) {
    EXPECT_EQ(calls[t].transcript.size(), transcript_prefix_size(tmpl, t) + 2 * t + 1);
    EXPECT_FALSE(calls[t].decoding.is_greedy());
    EXPECT_EQ(calls[t].decoding.temperature, kDefaultEvolutionTemperature);
    EXPECT_EQ(calls[t].tag.phase, Phase::kEvolution);
    EXPECT_EQ(out.steps[t].ledger_indices, std::vector<std::size_t>{t});
  }
  EXPECT_NE(calls[2].transcript.back().content.find(kBest.text()), std::string::npos);
  EXPECT_NE(calls[3].transcript.back().content.find(kBase.text()), std::string::npos);
  EXPECT_EQ(out.tokens.total(), ledger.total().tokens());
}

TEST(RunOperator, AfterStepEditFeedsLaterSteps) {
  ScriptedGateway g;
  g.register_sequence(ScriptedGateway::any(), {"New prompt: wrong", "<prompt>Mutated.</prompt>"});
  TokenLedger ledger;
  OperatorContext ctx{g, ledger};
  std::mt19937_64 rng(1);
  OperatorHooks hooks;
  hooks.after_step = [](const EvolutionStepRecord& r) -> std::optional<std::string> {
    if (r.step == 0) return "New prompt: corrected";
    return std::nullopt;
  };
  auto out = run_operator(TemplateRegistry::builtin().get("GA", true), {&kP1, &kP2}, ctx, rng, hooks);
  EXPECT_EQ(out.steps[0].response, "New prompt: corrected");
  EXPECT_EQ(out.steps[0].original_response, "New prompt: wrong");
  auto second = g.calls()[1].transcript;
  EXPECT_EQ(second[second.size() - 2].content, "New prompt: corrected");
}

TEST(RunOperator, FinalStepRetriedOnceThenFails) {
  ScriptedGateway g;
  g.register_sequence(ScriptedGateway::any(), {"crossed", "   ", "<prompt>ok</prompt>"});
  TokenLedger ledger;
  OperatorContext ctx{g, ledger};
  std::mt19937_64 rng(1);
  auto out = run_operator(TemplateRegistry::builtin().get("GA", true), {&kP1, &kP2}, ctx, rng);
  EXPECT_EQ(out.child, "ok");
  EXPECT_TRUE(out.steps.back().extraction_retried);
  EXPECT_EQ(out.steps.back().ledger_indices, (std::vector<std::size_t>{1, 2}));

  ScriptedGateway never;
  never.register_sequence(ScriptedGateway::any(), {"crossed", " "});
  TokenLedger l2;
  OperatorContext c2{never, l2};
  try {
    run_operator(TemplateRegistry::builtin().get("GA", true), {&kP1, &kP2}, c2, rng);
    FAIL();
  } catch (const OperatorExtractionError& e) {
    EXPECT_EQ(e.partial().steps.size(), 2u);
    EXPECT_EQ(l2.size(), 3u);
  }
}

TEST(RunOperator, MissingDeParentIsRejected) {
  OperatorParents p{&kP1, &kP2, nullptr, nullptr};
  EXPECT_THROW(make_bindings(Algorithm::kDE, p), std::invalid_argument);
  EXPECT_NO_THROW(make_bindings(Algorithm::kGA, p));
}

namespace {

class CountingParaphraser : public Paraphraser {
 public:
  PromptGenome paraphrase(const PromptGenome& source) override {
    sources.push_back(source.id());
    return PromptGenome::paraphrase("x" + std::to_string(sources.size()), source.text() + " (again)",
                                    source.id());
  }
  std::vector<std::string> sources;
};

std::vector<ScoredPrompt> scored(std::vector<double> f) {
  std::vector<ScoredPrompt> out;
  for (std::size_t i = 0; i < f.size(); ++i)
    out.push_back({PromptGenome::base("b" + std::to_string(i), "prompt " + std::to_string(i)), f[i]});
  return out;
}

}  // namespace

TEST(InitPopulation, KeepsTopHalfAndFillsRoundRobin) {
  CountingParaphraser p;
  auto pop = init_population(scored({0.2, 0.9, 0.5, 0.7}), 6, p);
  ASSERT_EQ(pop.size(), 6u);
  EXPECT_EQ(pop[0].id(), "b1");
  EXPECT_EQ(pop[1].id(), "b3");
  EXPECT_EQ(pop[2].id(), "b2");
  EXPECT_EQ(p.sources, (std::vector<std::string>{"b1", "b3", "b2"}));
}

TEST(InitPopulation, FewerBasesThanHalf) {
  CountingParaphraser p;
  auto pop = init_population(scored({0.4, 0.6}), 10, p);
  ASSERT_EQ(pop.size(), 10u);
  EXPECT_EQ(pop[0].id(), "b1");
  EXPECT_EQ(pop[1].id(), "b0");
  EXPECT_EQ(p.sources.size(), 8u);
  for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(p.sources[k], k % 2 == 0 ? "b1" : "b0");
}

TEST(LlmParaphraser, RetriesOnceThenReusesSource) {
  ScriptedGateway g;
  g.register_sequence(ScriptedGateway::any(), {"", "nothing\n\n", "<prompt>Fresh.</prompt>"});
  TokenLedger ledger;
  std::mt19937_64 rng(1);
  int n = 0;
  LlmParaphraser para(g, ledger, kDefaultParaphraseInstruction, rng,
                      [&] { return "q" + std::to_string(++n); });
  // First call: "" is not a prompt, "nothing" is (last-line fallback).
  auto first = para.paraphrase(kP1);
  EXPECT_EQ(first.text(), "nothing");
  EXPECT_EQ(first.origin(), Origin::kParaphrase);
  EXPECT_EQ(first.parent_ids(), std::vector<std::string>{"a"});
  EXPECT_EQ(ledger.size(), 2u);
  EXPECT_EQ(ledger.at(0).phase, Phase::kParaphrase);
}

TEST(Demonstrations, OnePerClassOrOne) {
  auto task = promptevo::testing::sentiment_task();
  auto data = promptevo::testing::reviews(10);
  std::mt19937_64 rng(5);
  auto demos = select_demonstrations(task, data, rng);
  ASSERT_EQ(demos.size(), 2u);
  EXPECT_EQ(demos[0].label, "negative");
  EXPECT_EQ(demos[1].label, "positive");
  task.kind = TaskKind::kGeneration;
  EXPECT_EQ(select_demonstrations(task, data, rng).size(), 1u);
  task.kind = TaskKind::kClassification;
  std::vector<Sample> only_positive{data[0], data[2]};
  EXPECT_THROW(select_demonstrations(task, only_positive, rng), std::runtime_error);
}
