#include "promptevo/core/config.hpp"

#include <cmath>
#include <set>

#include "promptevo/core/text.hpp"

namespace promptevo {

const std::string kDefaultJudgeInstruction =
    "You are acting as a judge. Please read the context, the instruction and the response and "
    "decide if the response follows the instruction. If it does, answer 'good'. If it does not, "
    "answer 'bad'. Wrap the answer with tags <judgement> and </judgement>. Please also add an "
    "explanation for your judgement.";

std::string_view to_string(EvaluationMode mode) {
  switch (mode) {
    case EvaluationMode::kFull: return "full";
    case EvaluationMode::kSubsample: return "subsample";
    case EvaluationMode::kEarlyStopping: return "early-stopping";
  }
  return "?";
}

std::string_view to_string(SampleOrdering ordering) {
  switch (ordering) {
    case SampleOrdering::kNatural: return "natural";
    case SampleOrdering::kShortestFirst: return "shortest-first";
    case SampleOrdering::kHardestFirst: return "hardest-first";
  }
  return "?";
}

std::string_view to_string(SurvivorMode mode) {
  return mode == SurvivorMode::kElitist ? "elitist" : "generational";
}

std::string_view to_string(BestBinding binding) {
  return binding == BestBinding::kBestSoFar ? "best-so-far" : "generation-best";
}

EvaluationMode parse_evaluation_mode(std::string_view text) {
  if (text == "full") return EvaluationMode::kFull;
  if (text == "subsample") return EvaluationMode::kSubsample;
  if (text == "early-stopping") return EvaluationMode::kEarlyStopping;
  throw InvariantError("unknown evaluation mode '" + std::string(text) + "'");
}

SampleOrdering parse_sample_ordering(std::string_view text) {
  if (text == "natural") return SampleOrdering::kNatural;
  if (text == "shortest-first") return SampleOrdering::kShortestFirst;
  if (text == "hardest-first") return SampleOrdering::kHardestFirst;
  throw InvariantError("unknown ordering '" + std::string(text) + "'");
}

SurvivorMode parse_survivor_mode(std::string_view text) {
  if (text == "elitist") return SurvivorMode::kElitist;
  if (text == "generational") return SurvivorMode::kGenerational;
  throw InvariantError("unknown survivor mode '" + std::string(text) + "'");
}

BestBinding parse_best_binding(std::string_view text) {
  if (text == "best-so-far") return BestBinding::kBestSoFar;
  if (text == "generation-best") return BestBinding::kGenerationBest;
  throw InvariantError("unknown best binding '" + std::string(text) + "'");
}

std::vector<Violation> validate_task(const TaskSpec& task) {
  std::vector<Violation> out;
  if (task.name.empty()) out.push_back({"task.name", "task name must be non-empty"});
  if (task.base_prompts.empty())
    out.push_back({"task.base_prompts", "base_prompts must contain at least one prompt"});
  for (std::size_t i = 0; i < task.base_prompts.size(); ++i) {
    if (is_blank(task.base_prompts[i]))
      out.push_back({"task.base_prompts", "base prompt " + std::to_string(i) + " is blank"});
  }
  if (task.kind == TaskKind::kClassification) {
    if (task.verbalizers.size() < 2)
      out.push_back({"task.verbalizers", "classification tasks need at least 2 verbalizers, got " +
                                             std::to_string(task.verbalizers.size())});
    std::set<std::string> seen;
    for (const auto& v : task.verbalizers) {
      if (is_blank(v)) out.push_back({"task.verbalizers", "verbalizers must be non-blank"});
      if (!seen.insert(to_lower(v)).second)
        out.push_back({"task.verbalizers", "verbalizer '" + v + "' is not unique (case-insensitive)"});
    }
  }
  if (task.metric.empty()) out.push_back({"task.metric", "metric identifier must be set"});
  return out;
}

namespace {

template <typename T, typename Parse>
T parse_or_report(const std::optional<std::string>& raw, T fallback, std::string_view field,
                  Parse parse, std::vector<Violation>& out) {
  if (!raw) return fallback;
  try {
    return parse(*raw);
  } catch (const InvariantError& e) {
    out.push_back({std::string(field), e.what()});
    return fallback;
  }
}

}  // namespace

ConfigValidation validate_config(const RunConfigSpec& spec, const TaskSpec& task) {
  ConfigValidation result;
  auto& v = result.violations;
  RunConfig c;

  c.population_size = spec.population_size.value_or(kDefaultPopulation);
  if (c.population_size < 2) v.push_back({"population_size", "population_size must be ≥ 2"});
  c.generations = spec.generations.value_or(kDefaultGenerations);
  if (c.generations < 1) v.push_back({"generations", "generations must be ≥ 1"});

  c.algorithm = parse_or_report(spec.algorithm, Algorithm::kGA, "algorithm", parse_algorithm, v);
  if (c.algorithm == Algorithm::kDE && c.population_size == 2)
    v.push_back({"population_size", "DE needs population_size ≥ 3 (a target and two other parents)"});
  c.template_version = spec.template_version.value_or(std::string(to_string(c.algorithm)));
  if (c.template_version.empty())
    v.push_back({"template_version", "template_version must be non-empty"});

  c.coi_enabled = spec.coi_enabled.value_or(true);
  c.judge_enabled = spec.judge_enabled.value_or(false);
  c.judge_max_retries = spec.judge_max_retries.value_or(kDefaultJudgeRetries);
  if (c.judge_max_retries < 1) v.push_back({"judge_max_retries", "judge_max_retries must be ≥ 1"});
  c.judge_instruction = spec.judge_instruction.value_or(kDefaultJudgeInstruction);
  if (is_blank(c.judge_instruction))
    v.push_back({"judge_instruction", "judge_instruction must be non-blank"});

  auto& s = c.strategy;
  s.mode = parse_or_report(spec.evaluation_mode, EvaluationMode::kEarlyStopping, "evaluation_mode",
                           parse_evaluation_mode, v);
  s.ordering = parse_or_report(spec.ordering, SampleOrdering::kNatural, "ordering",
                               parse_sample_ordering, v);
  s.subsample_factor = spec.subsample_factor.value_or(1.0 / 3.0);
  if (!(s.subsample_factor > 0.0 && s.subsample_factor < 1.0))
    v.push_back({"subsample_factor", "subsample_factor must lie in (0, 1)"});
  s.eta_m = spec.eta_m.value_or(kDefaultEtaM);
  if (!(s.eta_m >= 0.0) || !std::isfinite(s.eta_m)) v.push_back({"eta_m", "eta_m must be ≥ 0"});
  s.eta_p = spec.eta_p.value_or(kDefaultEtaP);
  if (!(s.eta_p >= 0.0) || !std::isfinite(s.eta_p)) v.push_back({"eta_p", "eta_p must be ≥ 0"});
  s.window = spec.window.value_or(kDefaultWindow);
  if (s.window < 1) v.push_back({"window", "window must be ≥ 1"});
  s.patience = spec.patience.value_or(kDefaultPatience);
  if (s.patience < 0) v.push_back({"patience", "patience must be ≥ 0"});

  c.evolution_temperature = spec.evolution_temperature.value_or(kDefaultEvolutionTemperature);
  if (!(c.evolution_temperature > 0.0))
    v.push_back({"evolution_temperature", "evolution_temperature must be > 0"});
  c.max_tokens = spec.max_tokens.value_or(kDefaultMaxTokens);
  if (c.max_tokens < 1) v.push_back({"max_tokens", "max_tokens must be ≥ 1"});
  c.seed = spec.seed.value_or(0);
  c.survivor = parse_or_report(spec.survivor, SurvivorMode::kElitist, "survivor",
                               parse_survivor_mode, v);
  c.de_best = parse_or_report(spec.de_best, BestBinding::kBestSoFar, "de_best",
                              parse_best_binding, v);
  c.review_enabled = spec.review_enabled.value_or(false);
  c.review_timeout_ms = spec.review_timeout_ms.value_or(0);
  if (c.review_timeout_ms < 0) v.push_back({"review_timeout_ms", "review_timeout_ms must be ≥ 0"});

  auto task_violations = validate_task(task);
  v.insert(v.end(), task_violations.begin(), task_violations.end());

  if (v.empty()) result.config = c;
  return result;
}

RunConfigSpec to_spec(const RunConfig& c) {
  RunConfigSpec s;
  s.population_size = c.population_size;
  s.generations = c.generations;
  s.algorithm = std::string(to_string(c.algorithm));
  s.template_version = c.template_version;
  s.coi_enabled = c.coi_enabled;
  s.judge_enabled = c.judge_enabled;
  s.judge_max_retries = c.judge_max_retries;
  s.judge_instruction = c.judge_instruction;
  s.evaluation_mode = std::string(to_string(c.strategy.mode));
  s.ordering = std::string(to_string(c.strategy.ordering));
  s.subsample_factor = c.strategy.subsample_factor;
  s.eta_m = c.strategy.eta_m;
  s.eta_p = c.strategy.eta_p;
  s.window = c.strategy.window;
  s.patience = c.strategy.patience;
  s.evolution_temperature = c.evolution_temperature;
  s.max_tokens = c.max_tokens;
  s.seed = c.seed;
  s.survivor = std::string(to_string(c.survivor));
  s.de_best = std::string(to_string(c.de_best));
  s.review_enabled = c.review_enabled;
  s.review_timeout_ms = c.review_timeout_ms;
  return s;
}

}  // namespace promptevo
