#include "promptevo/engine/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <set>

#include "promptevo/engine/selection.hpp"
#include "promptevo/operators/population.hpp"

namespace promptevo::engine {

std::string_view to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::kCompleted: return "completed";
    case RunOutcome::kStopped: return "stopped";
    case RunOutcome::kPaused: return "paused";
    case RunOutcome::kHalted: return "halted";
  }
  return "?";
}

namespace {

/// Paraphraser wrapper that journals every paraphrase with its ledger entries.
class JournalingParaphraser final : public operators::Paraphraser {
 public:
  JournalingParaphraser(operators::Paraphraser& inner, RunState& state)
      : inner_(inner), state_(state) {}

  PromptGenome paraphrase(const PromptGenome& source) override {
    const auto begin = state_.ledger.size();
    auto genome = inner_.paraphrase(source);
    std::vector<std::size_t> indices;
    for (auto i = begin; i < state_.ledger.size(); ++i) indices.push_back(i);
    state_.journal.append("paraphrase", 0, std::nullopt,
                          json{{"source_id", source.id()}, {"prompt_id", genome.id()},
                               {"text", genome.text()}},
                          std::move(indices));
    state_.genomes.emplace(genome.id(), genome);
    return genome;
  }

 private:
  operators::Paraphraser& inner_;
  RunState& state_;
};

json stop_details(const eval::FitnessResult& r) {
  return json{{"prompt_id", r.prompt_id},
              {"fitness", r.fitness},
              {"samples_used", r.samples_used},
              {"dataset_size", r.dataset_size},
              {"stop_reason", eval::to_string(r.stop_reason)},
              {"calls", r.calls}};
}

std::size_t best_index(const std::vector<Member>& population) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i)
    if (population[i].score() > population[best].score()) best = i;
  return best;
}

}  // namespace

Engine::Engine(RunState state, llm::LlmGateway& gateway, eval::MetricRegistry metrics,
               EngineOptions options)
    : state_(std::move(state)),
      gateway_(gateway),
      metrics_(std::move(metrics)),
      options_(std::move(options)) {
  if (state_.config.judge_enabled) {
    judge::JudgeConfig cfg{true, state_.config.judge_max_retries, state_.config.judge_instruction};
    judge_.emplace(gateway_, cfg, state_.config.max_tokens);
  }
  if (state_.task.kind == TaskKind::kGeneration && !metrics_.contains(state_.task.metric))
    throw std::invalid_argument("metric '" + state_.task.metric + "' is not registered");
  state_.templates.get(state_.config.template_version, state_.config.coi_enabled);
  if (state_.templates.get(state_.config.template_version, state_.config.coi_enabled).algorithm !=
      state_.config.algorithm) {
    throw std::invalid_argument("template " + state_.config.template_version +
                                " does not implement " +
                                std::string(promptevo::to_string(state_.config.algorithm)));
  }
}

eval::Evaluator Engine::make_evaluator() {
  return eval::Evaluator(state_.task, metrics_, state_.demonstrations, gateway_, state_.ledger,
                         state_.config.max_tokens);
}

Member Engine::evaluate(const PromptGenome& genome, int generation, std::optional<int> slot) {
  std::vector<const eval::SampleScoreTrace*> parents;
  const eval::SampleScoreTrace* best_parent = nullptr;
  double best_fitness = -1.0;
  for (const auto& pid : genome.parent_ids()) {
    auto it = state_.evaluations.find(pid);
    if (it == state_.evaluations.end()) continue;
    parents.push_back(&it->second.trace);
    if (it->second.fitness > best_fitness) {
      best_fitness = it->second.fitness;
      best_parent = &it->second.trace;
    }
  }
  // Paraphrases share no sample stream with their source in the parent sense.
  if (genome.origin() == Origin::kParaphrase) {
    parents.clear();
    best_parent = nullptr;
  }

  auto evaluator = make_evaluator();
  auto result = evaluator.evaluate(genome, state_.dataset, state_.config.strategy, parents,
                                   best_parent, state_.subsample.empty() ? nullptr : &state_.subsample,
                                   generation, state_.cache);
  state_.journal.append("evaluation", generation, slot, stop_details(result), result.ledger_indices);
  state_.evaluations.insert_or_assign(genome.id(), result);
  return Member{genome, std::move(result)};
}

void Engine::initialize() {
  if (state_.initialized) return;
  state_.status = RunStatus::kRunning;
  state_.journal.append("run-started", 0, std::nullopt,
                        json{{"run_id", state_.run_id},
                             {"task", state_.task.name},
                             {"dataset_size", state_.dataset.size()},
                             {"config", state_.config}});

  state_.demonstrations = operators::select_demonstrations(state_.task, state_.dataset, state_.rng);
  if (state_.config.strategy.mode == EvaluationMode::kSubsample)
    state_.subsample = eval::draw_subsample(state_.dataset, state_.config.strategy.subsample_factor,
                                            state_.rng);

  std::vector<operators::ScoredPrompt> bases;
  for (const auto& text : state_.task.base_prompts) {
    auto genome = PromptGenome::base(state_.allocate_id(), text);
    state_.genomes.emplace(genome.id(), genome);
    auto member = evaluate(genome, 0, std::nullopt);
    bases.push_back({genome, member.score()});
  }

  operators::LlmParaphraser llm_paraphraser(
      gateway_, state_.ledger, state_.templates.paraphrase_instruction(), state_.rng,
      [this] { return state_.allocate_id(); }, state_.config.evolution_temperature,
      state_.config.max_tokens);
  JournalingParaphraser paraphraser(llm_paraphraser, state_);
  auto genomes = operators::init_population(bases, state_.config.population_size, paraphraser);

  state_.population.clear();
  std::size_t evaluations = bases.size();
  std::size_t samples = 0;
  for (const auto& [id, r] : state_.evaluations) samples += r.samples_used;
  for (const auto& genome : genomes) {
    auto it = state_.evaluations.find(genome.id());
    if (it != state_.evaluations.end()) {
      state_.population.push_back(Member{genome, it->second});
    } else {
      auto member = evaluate(genome, 0, std::nullopt);
      samples += member.fitness.samples_used;
      ++evaluations;
      state_.population.push_back(std::move(member));
    }
  }

  state_.generation = 0;
  state_.initialized = true;
  state_.best_so_far.reset();
  record_generation(0, evaluations, samples);
  state_.initial_best = state_.history.back().best;
}

void Engine::record_generation(int generation, std::size_t evaluations, std::size_t samples_used) {
  const auto best = best_index(state_.population);
  double sum = 0.0;
  GenerationStats stats;
  stats.generation = generation;
  for (const auto& m : state_.population) {
    sum += m.score();
    stats.population.push_back(m.genome.id());
  }
  if (!state_.best_so_far || state_.population[best].score() > state_.best_so_far->score())
    state_.best_so_far = state_.population[best];
  stats.best = state_.population[best].score();
  stats.mean = sum / static_cast<double>(state_.population.size());
  stats.best_so_far = state_.best_so_far->score();
  stats.best_id = state_.population[best].genome.id();
  stats.evaluations = evaluations;
  stats.samples_used = samples_used;
  state_.history.push_back(stats);
  state_.journal.append("generation-finished", generation, std::nullopt,
                        json{{"best", stats.best},
                             {"mean", stats.mean},
                             {"best_so_far", stats.best_so_far},
                             {"best_id", stats.best_id},
                             {"population", stats.population}});
}

std::optional<std::string> Engine::await_review(int generation, int slot,
                                                const operators::EvolutionStepRecord& record) {
  if (!state_.config.review_enabled || options_.reviews == nullptr) return std::nullopt;

  char number[32];
  std::snprintf(number, sizeof number, "r%04llu", static_cast<unsigned long long>(state_.next_review++));
  ReviewItem item;
  item.id = state_.run_id + "-" + number;
  item.run_id = state_.run_id;
  item.generation = generation;
  item.slot = slot;
  item.step = static_cast<int>(record.step) + 1;
  item.template_version = state_.config.template_version;
  item.instruction = record.instruction;
  item.response = record.response;
  item.verdicts = record.verdicts;
  options_.reviews->add(item);
  state_.journal.append("review-requested", generation, slot,
                        json{{"review_id", item.id}, {"step", item.step}});
  publish();

  auto auto_approve = [&] {
    options_.reviews->resolve(item.id, ReviewStatus::kAutoApproved);
    state_.journal.append("review-resolved", generation, slot,
                          json{{"review_id", item.id}, {"status", "auto-approved"}});
    return std::nullopt;
  };
  if (options_.commands == nullptr) return auto_approve();

  using Clock = std::chrono::steady_clock;
  const auto timeout = std::chrono::milliseconds(state_.config.review_timeout_ms);
  const auto deadline = Clock::now() + timeout;
  while (true) {
    std::chrono::milliseconds wait{0};
    if (timeout.count() > 0) {
      wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      if (wait.count() <= 0) return auto_approve();
    }
    auto command = options_.commands->wait_pop(wait);
    if (!command) return auto_approve();
    if (command->kind != CommandKind::kReviewDecision || command->review_id != item.id) {
      apply_command(*command);
      continue;
    }
    auto& entry = state_.journal.append("command", generation, slot,
                                        json{{"command", *command}, {"applied", true}});
    entry.actor = command->actor;
    entry.timestamp = command->submitted_at;
    if (command->approve) {
      options_.reviews->resolve(item.id, ReviewStatus::kApproved);
      state_.journal.append("review-resolved", generation, slot,
                            json{{"review_id", item.id}, {"status", "approved"}});
      return std::nullopt;
    }
    options_.reviews->resolve(item.id, ReviewStatus::kEdited, command->edit);
    state_.journal.append("review-resolved", generation, slot,
                          json{{"review_id", item.id},
                               {"status", "edited"},
                               {"original", record.response},
                               {"edited", command->edit}});
    return command->edit;
  }
}

Engine::SlotResult Engine::run_slot(int slot, int generation,
                                    const operators::OperatorParents& parents,
                                    std::vector<std::string> parent_ids) {
  const auto& cfg = state_.config;
  const auto& tmpl = state_.templates.get(cfg.template_version, cfg.coi_enabled);
  const auto child_id = state_.allocate_id();
  operators::OperatorContext ctx{gateway_, state_.ledger, judge_ ? &*judge_ : nullptr,
                                 cfg.evolution_temperature, cfg.max_tokens,
                                 llm::CallTag{Phase::kEvolution, child_id, generation}};
  operators::OperatorHooks hooks;
  hooks.before_step = [this](std::size_t) { apply_commands(); };
  hooks.after_step = [this, generation, slot](const operators::EvolutionStepRecord& record) {
    return await_review(generation, slot, record);
  };

  json details{{"template_version", tmpl.version},
               {"coi", tmpl.coi},
               {"algorithm", promptevo::to_string(tmpl.algorithm)},
               {"parent_ids", parent_ids},
               {"child_id", child_id}};
  auto collect = [](const operators::EvolutionOutcome& o) {
    std::vector<std::size_t> indices;
    for (const auto& s : o.steps) indices.insert(indices.end(), s.ledger_indices.begin(), s.ledger_indices.end());
    return indices;
  };

  operators::EvolutionOutcome outcome;
  try {
    outcome = operators::run_operator(tmpl, parents, ctx, state_.rng, hooks);
  } catch (const operators::OperatorExtractionError& e) {
    details["steps"] = e.partial().steps;
    details["error"] = e.what();
    state_.journal.append("operator-failed", generation, slot, details, collect(e.partial()));
    return {};
  }

  bool edited = false;
  bool accepted = true;
  for (const auto& s : outcome.steps) {
    edited = edited || s.original_response.has_value();
    accepted = accepted && s.accepted;
  }
  details["steps"] = outcome.steps;
  details["child"] = outcome.child;
  details["accepted"] = accepted;
  state_.journal.append("operator", generation, slot, details, collect(outcome));

  auto genome = edited ? PromptGenome::human_edited(child_id, outcome.child, generation, parent_ids)
                       : PromptGenome::evolved(child_id, outcome.child, generation, parent_ids,
                                               tmpl.version);
  state_.genomes.emplace(genome.id(), genome);
  return {evaluate(genome, generation, slot)};
}

void Engine::step_generation() {
  if (!state_.initialized) throw std::logic_error("step_generation before initialize");
  if (state_.status == RunStatus::kPaused) return;
  const int g = state_.generation + 1;
  const auto& cfg = state_.config;
  const auto population_size = state_.population.size();
  state_.journal.append("generation-started", g, std::nullopt, json::object());

  std::vector<double> fitness;
  for (const auto& m : state_.population) fitness.push_back(m.score());

  std::size_t evaluations = 0;
  std::size_t samples = 0;
  auto count = [&](const SlotResult& r) {
    if (!r.child) return;
    ++evaluations;
    samples += r.child->fitness.samples_used;
  };

  if (cfg.algorithm == Algorithm::kGA) {
    std::vector<Member> children;
    for (std::size_t slot = 0; slot < population_size; ++slot) {
      auto [a, b] = roulette_pair(fitness, state_.rng);
      const auto& pa = state_.population[a].genome;
      const auto& pb = state_.population[b].genome;
      auto result = run_slot(static_cast<int>(slot), g, {&pa, &pb, nullptr, nullptr},
                             {pa.id(), pb.id()});
      count(result);
      if (result.child) children.push_back(std::move(*result.child));
    }
    std::vector<Member> next;
    if (cfg.survivor == SurvivorMode::kElitist) {
      std::vector<Candidate> candidates;
      std::vector<const Member*> pool;
      for (const auto& m : state_.population) {
        candidates.push_back({m.genome.id(), m.score(), false});
        pool.push_back(&m);
      }
      for (const auto& m : children) {
        candidates.push_back({m.genome.id(), m.score(), true});
        pool.push_back(&m);
      }
      for (auto i : top_survivors(candidates, population_size)) next.push_back(*pool[i]);
    } else {
      next = children;
      if (next.size() < population_size) {
        std::vector<Candidate> candidates;
        for (const auto& m : state_.population) candidates.push_back({m.genome.id(), m.score(), false});
        for (auto i : top_survivors(candidates, population_size - next.size()))
          next.push_back(state_.population[i]);
      }
    }
    state_.population = std::move(next);
  } else {
    const auto generation_best = state_.population[best_index(state_.population)];
    const auto& best = cfg.de_best == BestBinding::kBestSoFar && state_.best_so_far
                           ? state_.best_so_far->genome
                           : generation_best.genome;
    std::vector<Member> next = state_.population;
    for (std::size_t slot = 0; slot < population_size; ++slot) {
      auto [a, b] = roulette_pair(fitness, state_.rng, slot);
      const auto& target = state_.population[slot].genome;
      const auto& pa = state_.population[a].genome;
      const auto& pb = state_.population[b].genome;
      auto result = run_slot(static_cast<int>(slot), g, {&pa, &pb, &best, &target},
                             {target.id(), pa.id(), pb.id()});
      count(result);
      if (!result.child) continue;
      if (cfg.survivor == SurvivorMode::kGenerational ||
          de_replaces(result.child->score(), state_.population[slot].score()))
        next[slot] = std::move(*result.child);
    }
    state_.population = std::move(next);
  }

  json ids = json::array();
  for (const auto& m : state_.population) ids.push_back(m.genome.id());
  state_.journal.append("survivors", g, std::nullopt, json{{"population", ids}});
  state_.generation = g;
  record_generation(g, evaluations, samples);
}

bool Engine::apply_command(const FeedbackCommand& command) {
  auto reject = [&](const std::string& reason) {
    auto& e = state_.journal.append("command", state_.generation, std::nullopt,
                                    json{{"command", command}, {"applied", false}, {"error", reason}});
    e.actor = command.actor;
    e.timestamp = command.submitted_at;
    publish();
    return false;
  };
  json extra = json::object();

  switch (command.kind) {
    case CommandKind::kPause:
      if (state_.status == RunStatus::kRunning || state_.status == RunStatus::kCreated)
        state_.status = RunStatus::kPaused;
      break;
    case CommandKind::kResume:
      if (state_.status == RunStatus::kPaused) state_.status = RunStatus::kRunning;
      break;
    case CommandKind::kReplaceTemplate:
    case CommandKind::kSetDemonstrations: {
      if (!state_.templates.contains(command.version, command.coi))
        return reject("unknown template " + command.version);
      auto candidate = state_.templates.get(command.version, command.coi);
      if (command.step < 1 || static_cast<std::size_t>(command.step) > candidate.steps.size())
        return reject("template " + command.version + " has no step " + std::to_string(command.step));
      auto& step = candidate.steps[static_cast<std::size_t>(command.step - 1)];
      if (command.kind == CommandKind::kReplaceTemplate) {
        extra["previous"] = step.instruction;
        step.instruction = command.instruction;
      } else {
        extra["previous"] = step.demonstrations;
        step.demonstrations = command.demonstrations;
      }
      try {
        operators::validate_template(candidate);
      } catch (const operators::TemplateError& e) {
        return reject(e.what());
      }
      state_.templates.get_mutable(command.version, command.coi) = std::move(candidate);
      break;
    }
    case CommandKind::kReviewDecision:
      return reject("no step is awaiting review " + command.review_id);
  }

  json details{{"command", command}, {"applied", true}};
  if (!extra.empty()) details["previous"] = extra["previous"];
  auto& e = state_.journal.append("command", state_.generation, std::nullopt, details);
  e.actor = command.actor;
  e.timestamp = command.submitted_at;
  publish();
  return true;
}

void Engine::apply_commands() {
  if (options_.commands == nullptr) return;
  for (const auto& command : options_.commands->drain()) apply_command(command);
}

void Engine::checkpoint() {
  if (options_.checkpoint_path) write_checkpoint(state_, *options_.checkpoint_path);
}

void Engine::publish() {
  if (options_.on_snapshot) options_.on_snapshot(state_);
}

void Engine::halt(const RunState& boundary, const std::string& reason) {
  RunState halted = boundary;
  halted.ledger = state_.ledger;
  halted.cache = state_.cache;
  halted.journal = state_.journal;
  halted.next_review = state_.next_review;
  halted.templates = state_.templates;
  halted.status = RunStatus::kHalted;
  halted.halt_reason = reason;
  halted.journal.append("halted", boundary.generation, std::nullopt, json{{"reason", reason}});
  state_ = std::move(halted);
  checkpoint();
  publish();
}

void Engine::wait_while_paused() {
  while (state_.status == RunStatus::kPaused && options_.commands != nullptr &&
         !options_.commands->closed()) {
    auto command = options_.commands->wait_pop(std::chrono::milliseconds(0));
    if (!command) break;
    apply_command(*command);
  }
}

RunOutcome Engine::run(std::optional<int> until_generation) {
  const int target = std::min(until_generation.value_or(state_.config.generations),
                              state_.config.generations);
  if (state_.status == RunStatus::kHalted || state_.status == RunStatus::kCreated) {
    state_.status = RunStatus::kRunning;
    state_.halt_reason.clear();
  }
  RunState boundary = state_;
  try {
    if (!state_.initialized) {
      initialize();
      checkpoint();
      publish();
    }
    while (state_.generation < target) {
      apply_commands();
      if (state_.status == RunStatus::kPaused) {
        if (options_.wait_when_paused) wait_while_paused();
        if (state_.status == RunStatus::kPaused) {
          checkpoint();
          publish();
          return RunOutcome::kPaused;
        }
      }
      boundary = state_;
      step_generation();
      checkpoint();
      publish();
    }
  } catch (const llm::GatewayError& e) {
    halt(boundary, e.what());
    return RunOutcome::kHalted;
  }
  if (state_.generation >= state_.config.generations) {
    state_.status = RunStatus::kCompleted;
    checkpoint();
    publish();
    return RunOutcome::kCompleted;
  }
  return RunOutcome::kStopped;
}

}  // namespace promptevo::engine
