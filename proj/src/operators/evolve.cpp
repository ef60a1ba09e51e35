#include "promptevo/operators/evolve.hpp"

#include "promptevo/core/text.hpp"

namespace promptevo::operators {

std::vector<bool> EvolutionOutcome::accepted_by_judge() const {
  std::vector<bool> flags;
  for (const auto& s : steps) flags.push_back(s.accepted);
  return flags;
}

std::size_t transcript_prefix_size(const OperatorTemplate& tmpl, std::size_t t) {
  std::size_t count = tmpl.system_message.empty() ? 0 : 1;
  for (std::size_t k = 0; k <= t && k < tmpl.steps.size(); ++k)
    count += 2 * tmpl.steps[k].demonstrations.size();
  return count;
}

llm::Transcript build_coi_transcript(const OperatorTemplate& tmpl, std::size_t t,
                                     const std::vector<EvolutionStepRecord>& prior,
                                     const Bindings& bindings) {
  if (t >= tmpl.steps.size()) {
    throw std::out_of_range("step " + std::to_string(t) + " out of range for template " +
                            tmpl.version + " with " + std::to_string(tmpl.steps.size()) + " steps");
  }
  if (prior.size() != t) {
    throw std::invalid_argument("step " + std::to_string(t) + " needs exactly " +
                                std::to_string(t) + " prior records, got " +
                                std::to_string(prior.size()));
  }
  llm::Transcript out;
  if (!tmpl.system_message.empty()) out.push_back(llm::Message::system(tmpl.system_message));

  std::size_t demo_count = 0;
  for (std::size_t k = 0; k <= t; ++k)
    demo_count = std::max(demo_count, tmpl.steps[k].demonstrations.size());
  for (std::size_t d = 0; d < demo_count; ++d) {
    for (std::size_t k = 0; k <= t; ++k) {
      const auto& demos = tmpl.steps[k].demonstrations;
      if (d >= demos.size()) continue;
      out.push_back(llm::Message::user(demos[d].instruction));
      out.push_back(llm::Message::assistant(demos[d].response));
    }
  }

  for (std::size_t k = 0; k < t; ++k) {
    out.push_back(llm::Message::user(prior[k].instruction));
    out.push_back(llm::Message::assistant(prior[k].response));
  }
  out.push_back(llm::Message::user(render_instruction(tmpl.steps[t].instruction, bindings)));
  return out;
}

Bindings make_bindings(Algorithm algorithm, const OperatorParents& parents) {
  auto require = [](const PromptGenome* g, const char* name) -> const std::string& {
    if (g == nullptr) throw std::invalid_argument(std::string("operator needs a ") + name + " prompt");
    return g->text();
  };
  Bindings b{{"prompt1", require(parents.parent1, "first parent")},
             {"prompt2", require(parents.parent2, "second parent")}};
  if (algorithm == Algorithm::kDE) {
    b["best_prompt"] = require(parents.best, "best");
    b["base_prompt"] = require(parents.base, "base");
  }
  return b;
}

namespace {

EvolutionStepRecord execute_step(const OperatorTemplate& tmpl, std::size_t t,
                                 const std::vector<EvolutionStepRecord>& prior,
                                 const Bindings& bindings, OperatorContext& ctx,
                                 std::mt19937_64& rng, Usage& tokens) {
  auto transcript = build_coi_transcript(tmpl, t, prior, bindings);
  EvolutionStepRecord record;
  record.step = t;
  record.instruction = transcript.back().content;

  auto generate = [&](int) {
    auto decoding = llm::DecodingParams::sampled(ctx.temperature, rng(), ctx.max_tokens);
    auto call = ctx.gateway.complete(transcript, decoding, ctx.tag, ctx.ledger);
    record.ledger_indices.push_back(call.ledger_index);
    tokens += call.result.usage;
    return call.result.content;
  };

  const llm::Transcript context(transcript.begin(), transcript.end() - 1);
  auto run_judge = [&](const std::string& response) {
    if (is_blank(response))
      return judge::Verdict{judge::Decision::kBad, "empty response", response, false};
    std::size_t index = 0;
    auto verdict = ctx.judge->judge(context, record.instruction, response, ctx.tag, ctx.ledger, &index);
    record.ledger_indices.push_back(index);
    tokens += Usage{ctx.ledger.at(index).prompt_tokens, ctx.ledger.at(index).completion_tokens};
    return verdict;
  };

  judge::JudgeConfig cfg;
  if (ctx.judge != nullptr) cfg = ctx.judge->config();
  auto guarded = judge::guarded_generate(generate, cfg, run_judge);
  record.response = std::move(guarded.response);
  record.attempts = guarded.attempts;
  record.verdicts = std::move(guarded.verdicts);
  record.accepted = guarded.accepted;
  return record;
}

}  // namespace

EvolutionOutcome run_operator(const OperatorTemplate& tmpl, const OperatorParents& parents,
                              OperatorContext& ctx, std::mt19937_64& rng,
                              const OperatorHooks& hooks) {
  validate_template(tmpl);
  const auto bindings = make_bindings(tmpl.algorithm, parents);
  EvolutionOutcome outcome;
  const std::size_t steps = tmpl.steps.size();

  auto finish_step = [&](EvolutionStepRecord record) {
    if (hooks.after_step) {
      if (auto edited = hooks.after_step(record)) {
        record.original_response = record.response;
        record.response = *edited;
      }
    }
    return record;
  };

  for (std::size_t t = 0; t < steps; ++t) {
    if (hooks.before_step) hooks.before_step(t);
    outcome.steps.push_back(
        finish_step(execute_step(tmpl, t, outcome.steps, bindings, ctx, rng, outcome.tokens)));
  }

  try {
    outcome.child = extract_final_prompt(outcome.steps.back().response);
    return outcome;
  } catch (const ExtractionError&) {
  }

  // One re-attempt of the final step.
  auto failed = std::move(outcome.steps.back());
  outcome.steps.pop_back();
  if (hooks.before_step) hooks.before_step(steps - 1);
  auto retry = finish_step(execute_step(tmpl, steps - 1, outcome.steps, bindings, ctx, rng, outcome.tokens));
  retry.extraction_retried = true;
  retry.ledger_indices.insert(retry.ledger_indices.begin(), failed.ledger_indices.begin(),
                              failed.ledger_indices.end());
  outcome.steps.push_back(std::move(retry));
  try {
    outcome.child = extract_final_prompt(outcome.steps.back().response);
  } catch (const ExtractionError& e) {
    throw OperatorExtractionError(std::string("operator ") + tmpl.version + ": " + e.what(),
                                  std::move(outcome));
  }
  return outcome;
}

}  // namespace promptevo::operators
