#include "promptevo/engine/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace promptevo::engine {

BudgetSummary budget_summary(const RunState& state) {
  BudgetSummary b;
  for (const auto& h : state.history) {
    if (h.generation < 1) continue;
    b.evaluations += h.evaluations;
    b.samples_used += h.samples_used;
  }
  const auto d = state.dataset.size();
  const auto population = static_cast<std::size_t>(state.config.population_size);
  const auto generations = static_cast<std::size_t>(state.generation);
  b.samples_baseline = d * population * generations;
  if (b.samples_baseline > 0)
    b.samples_fraction = static_cast<double>(b.samples_used) / static_cast<double>(b.samples_baseline);

  for (const auto& e : state.ledger.entries()) {
    if (e.phase != Phase::kEvaluation || e.generation < 1) continue;
    b.evaluation_tokens += e.prompt_tokens + e.completion_tokens;
    b.evaluation_wall_ms += e.wall_time.count();
    ++b.evaluation_calls;
  }
  if (b.evaluation_calls > 0) {
    b.tokens_per_inference =
        static_cast<double>(b.evaluation_tokens) / static_cast<double>(b.evaluation_calls);
    b.tokens_baseline = b.tokens_per_inference * static_cast<double>(b.samples_baseline);
    b.tokens_fraction = static_cast<double>(b.evaluation_tokens) / b.tokens_baseline;
  }
  return b;
}

json score_held_out(const RunState& state, const std::vector<Sample>& test, llm::LlmGateway& gateway,
                    const eval::MetricRegistry& metrics, TokenLedger& ledger) {
  if (test.empty()) throw std::invalid_argument("held-out set is empty");
  std::vector<const Member*> candidates;
  auto add = [&](const Member& m) {
    for (const auto* c : candidates)
      if (c->genome.id() == m.genome.id()) return;
    candidates.push_back(&m);
  };
  if (state.best_so_far) add(*state.best_so_far);
  for (const auto& m : state.population) add(m);

  eval::Evaluator evaluator(state.task, metrics, state.demonstrations, gateway, ledger,
                            state.config.max_tokens);
  StrategyConfig full;
  full.mode = EvaluationMode::kFull;
  eval::ScoreCache cache;
  json members = json::array();
  const json* by_validation = nullptr;
  const json* by_test = nullptr;
  for (const auto* m : candidates) {
    auto r = evaluator.evaluate(m->genome, test, full, {}, nullptr, nullptr, state.generation, cache);
    members.push_back(json{{"id", m->genome.id()},
                           {"text", m->genome.text()},
                           {"validation_fitness", m->score()},
                           {"test_score", r.fitness}});
  }
  for (const auto& entry : members) {
    if (!by_validation || entry["validation_fitness"].get<double>() > (*by_validation)["validation_fitness"].get<double>())
      by_validation = &entry;
    if (!by_test || entry["test_score"].get<double>() > (*by_test)["test_score"].get<double>()) by_test = &entry;
  }
  return json{{"dataset_size", test.size()},
              {"members", members},
              {"best_by_validation", *by_validation},
              {"best_by_test", *by_test}};
}

json build_report(const RunState& state, const std::optional<json>& held_out) {
  json report{{"run_id", state.run_id},
              {"task", state.task.name},
              {"status", to_string(state.status)},
              {"generations_completed", state.generation},
              {"config", state.config}};
  if (!state.halt_reason.empty()) report["halt_reason"] = state.halt_reason;

  if (state.best_so_far) {
    const auto& best = *state.best_so_far;
    report["best"] = json{{"id", best.genome.id()},
                          {"text", best.genome.text()},
                          {"fitness", best.score()},
                          {"generation", best.genome.generation()},
                          {"origin", to_string(best.genome.origin())},
                          {"samples_used", best.fitness.samples_used}};
  } else {
    report["best"] = nullptr;
  }
  if (state.initial_best) {
    report["initial_best_fitness"] = *state.initial_best;
    report["delta_s"] = state.best_so_far ? state.best_so_far->score() - *state.initial_best : 0.0;
  }

  json history = json::array();
  for (const auto& h : state.history) history.push_back(h);
  report["history"] = history;

  json ledger{{"total", state.ledger.total()}};
  for (auto phase : {Phase::kParaphrase, Phase::kEvolution, Phase::kJudge, Phase::kEvaluation})
    ledger[std::string(to_string(phase))] = state.ledger.total(phase);
  report["ledger"] = ledger;

  const auto b = budget_summary(state);
  report["budget"] = json{{"evaluations", b.evaluations},
                          {"samples_used", b.samples_used},
                          {"samples_baseline", b.samples_baseline},
                          {"samples_fraction", b.samples_fraction},
                          {"evaluation_tokens", b.evaluation_tokens},
                          {"evaluation_calls", b.evaluation_calls},
                          {"tokens_per_inference", b.tokens_per_inference},
                          {"tokens_baseline", b.tokens_baseline},
                          {"tokens_fraction", b.tokens_fraction},
                          {"evaluation_wall_ms", b.evaluation_wall_ms}};
  if (held_out) report["held_out"] = *held_out;
  return report;
}

std::string report_text(const json& report) {
  std::ostringstream out;
  char line[256];
  out << "run " << report.at("run_id").get<std::string>() << " on " << report.at("task").get<std::string>()
      << ": " << report.at("status").get<std::string>() << " after "
      << report.at("generations_completed").get<int>() << " generation(s)\n";
  if (!report.at("best").is_null()) {
    const auto& best = report.at("best");
    std::snprintf(line, sizeof line, "best fitness %.4f (%s, generation %d)\n",
                  best.at("fitness").get<double>(), best.at("id").get<std::string>().c_str(),
                  best.at("generation").get<int>());
    out << line << "best prompt:\n  " << best.at("text").get<std::string>() << "\n";
  }
  if (report.contains("delta_s")) {
    std::snprintf(line, sizeof line, "improvement over generation-0 best: %+.4f\n",
                  report.at("delta_s").get<double>());
    out << line;
  }
  out << "history (generation: best / mean / best so far)\n";
  for (const auto& h : report.at("history")) {
    std::snprintf(line, sizeof line, "  %3d: %.4f / %.4f / %.4f\n", h.at("generation").get<int>(),
                  h.at("best").get<double>(), h.at("mean").get<double>(),
                  h.at("best_so_far").get<double>());
    out << line;
  }
  const auto& ledger = report.at("ledger");
  out << "tokens: total " << ledger.at("total").at("tokens").get<std::int64_t>();
  for (const char* phase : {"paraphrase", "evolution", "judge", "evaluation"})
    out << ", " << phase << " " << ledger.at(phase).at("tokens").get<std::int64_t>();
  out << "\n";
  const auto& b = report.at("budget");
  std::snprintf(line, sizeof line,
                "evaluation budget: %zu of %zu samples (%.2f%%), %lld tokens vs %.0f baseline (%.2f%%)\n",
                b.at("samples_used").get<std::size_t>(), b.at("samples_baseline").get<std::size_t>(),
                100.0 * b.at("samples_fraction").get<double>(),
                static_cast<long long>(b.at("evaluation_tokens").get<std::int64_t>()),
                b.at("tokens_baseline").get<double>(), 100.0 * b.at("tokens_fraction").get<double>());
  out << line;
  if (report.contains("held_out")) {
    const auto& h = report.at("held_out");
    for (const char* key : {"best_by_validation", "best_by_test"}) {
      const auto& m = h.at(key);
      std::snprintf(line, sizeof line, "%s: %s, validation %.4f, test %.4f over %zu samples\n", key,
                    m.at("id").get<std::string>().c_str(), m.at("validation_fitness").get<double>(),
                    m.at("test_score").get<double>(), h.at("dataset_size").get<std::size_t>());
      out << line;
    }
  }
  return out.str();
}

void write_report(const RunState& state, const std::filesystem::path& dir,
                  const std::optional<json>& held_out) {
  std::filesystem::create_directories(dir);
  const auto report = build_report(state, held_out);
  std::ofstream(dir / "report.json") << report.dump(2) << '\n';
  std::ofstream(dir / "report.txt") << report_text(report);
}

}  // namespace promptevo::engine
