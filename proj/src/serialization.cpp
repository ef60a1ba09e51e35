#include "promptevo/serialization.hpp"

#include <set>

namespace promptevo {

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& value) {
  if (value) j[key] = *value;
}

template <typename T>
void get_optional(const json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    out = it->get<T>();
  } else {
    out.reset();
  }
}

}  // namespace

}  // namespace promptevo

namespace nlohmann {

void adl_serializer<promptevo::PromptGenome>::to_json(json& j, const promptevo::PromptGenome& g) {
  using promptevo::to_string;
  j = json{{"id", g.id()},
           {"text", g.text()},
           {"generation", g.generation()},
           {"origin", to_string(g.origin())},
           {"parent_ids", g.parent_ids()}};
  j["template_version"] = g.template_version() ? json(*g.template_version()) : json(nullptr);
}

promptevo::PromptGenome adl_serializer<promptevo::PromptGenome>::from_json(const json& j) {
  using namespace promptevo;
  std::optional<std::string> version;
  if (auto it = j.find("template_version"); it != j.end() && !it->is_null())
    version = it->get<std::string>();
  return PromptGenome::restore(j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                               j.at("generation").get<int>(),
                               parse_origin(j.at("origin").get<std::string>()),
                               j.value("parent_ids", std::vector<std::string>{}), version);
}

}  // namespace nlohmann

namespace promptevo {

void to_json(json& j, const Sample& s) {
  j = json{{"id", s.id}, {"input", s.input}, {"references", s.references}};
  if (s.label) j["label"] = *s.label;
}

void from_json(const json& j, Sample& s) {
  std::optional<std::string> label;
  get_optional(j, "label", label);
  s = Sample::make(j.at("id").get<std::string>(), j.at("input").get<std::string>(),
                   j.value("references", std::vector<std::string>{}), label);
}

void to_json(json& j, const TaskSpec& t) {
  j = json{{"name", t.name},
           {"kind", to_string(t.kind)},
           {"verbalizers", t.verbalizers},
           {"metric", t.metric},
           {"base_prompts", t.base_prompts}};
}

void from_json(const json& j, TaskSpec& t) {
  t.name = j.at("name").get<std::string>();
  t.kind = parse_task_kind(j.at("kind").get<std::string>());
  t.verbalizers = j.value("verbalizers", std::vector<std::string>{});
  t.metric = j.value("metric", std::string());
  t.base_prompts = j.at("base_prompts").get<std::vector<std::string>>();
}

void to_json(json& j, const Usage& u) {
  j = json{{"prompt_tokens", u.prompt_tokens}, {"completion_tokens", u.completion_tokens}};
}

void from_json(const json& j, Usage& u) {
  u.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  u.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
}

void to_json(json& j, const LedgerEntry& e) {
  j = json{{"phase", to_string(e.phase)},
           {"prompt_id", e.prompt_id},
           {"prompt_tokens", e.prompt_tokens},
           {"completion_tokens", e.completion_tokens},
           {"wall_time_ms", e.wall_time.count()},
           {"generation", e.generation}};
}

void from_json(const json& j, LedgerEntry& e) {
  e.phase = parse_phase(j.at("phase").get<std::string>());
  e.prompt_id = j.at("prompt_id").get<std::string>();
  e.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  e.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  e.wall_time = std::chrono::milliseconds(j.at("wall_time_ms").get<std::int64_t>());
  e.generation = j.at("generation").get<int>();
}

void to_json(json& j, const LedgerTotals& t) {
  j = json{{"prompt_tokens", t.prompt_tokens},
           {"completion_tokens", t.completion_tokens},
           {"tokens", t.tokens()},
           {"wall_time_ms", t.wall_time.count()},
           {"calls", t.calls}};
}

void to_json(json& j, const RunConfigSpec& s) {
  j = json::object();
  put_optional(j, "population_size", s.population_size);
  put_optional(j, "generations", s.generations);
  put_optional(j, "algorithm", s.algorithm);
  put_optional(j, "template_version", s.template_version);
  put_optional(j, "coi_enabled", s.coi_enabled);
  put_optional(j, "judge_enabled", s.judge_enabled);
  put_optional(j, "judge_max_retries", s.judge_max_retries);
  put_optional(j, "judge_instruction", s.judge_instruction);
  put_optional(j, "evaluation_mode", s.evaluation_mode);
  put_optional(j, "ordering", s.ordering);
  put_optional(j, "subsample_factor", s.subsample_factor);
  put_optional(j, "eta_m", s.eta_m);
  put_optional(j, "eta_p", s.eta_p);
  put_optional(j, "window", s.window);
  put_optional(j, "patience", s.patience);
  put_optional(j, "evolution_temperature", s.evolution_temperature);
  put_optional(j, "max_tokens", s.max_tokens);
  put_optional(j, "seed", s.seed);
  put_optional(j, "survivor", s.survivor);
  put_optional(j, "de_best", s.de_best);
  put_optional(j, "review_enabled", s.review_enabled);
  put_optional(j, "review_timeout_ms", s.review_timeout_ms);
}

void from_json(const json& j, RunConfigSpec& s) {
  if (!j.is_object()) throw json::type_error::create(302, "run configuration must be an object", &j);
  static const std::set<std::string> known = {
      "population_size", "generations", "algorithm", "template_version", "coi_enabled",
      "judge_enabled", "judge_max_retries", "judge_instruction", "evaluation_mode", "ordering",
      "subsample_factor", "eta_m", "eta_p", "window", "patience", "evolution_temperature",
      "max_tokens", "seed", "survivor", "de_best", "review_enabled", "review_timeout_ms"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key))
      throw json::other_error::create(501, "unknown run configuration field '" + key + "'", &j);
  }
  get_optional(j, "population_size", s.population_size);
  get_optional(j, "generations", s.generations);
  get_optional(j, "algorithm", s.algorithm);
  get_optional(j, "template_version", s.template_version);
  get_optional(j, "coi_enabled", s.coi_enabled);
  get_optional(j, "judge_enabled", s.judge_enabled);
  get_optional(j, "judge_max_retries", s.judge_max_retries);
  get_optional(j, "judge_instruction", s.judge_instruction);
  get_optional(j, "evaluation_mode", s.evaluation_mode);
  get_optional(j, "ordering", s.ordering);
  get_optional(j, "subsample_factor", s.subsample_factor);
  get_optional(j, "eta_m", s.eta_m);
  get_optional(j, "eta_p", s.eta_p);
  get_optional(j, "window", s.window);
  get_optional(j, "patience", s.patience);
  get_optional(j, "evolution_temperature", s.evolution_temperature);
  get_optional(j, "max_tokens", s.max_tokens);
  get_optional(j, "seed", s.seed);
  get_optional(j, "survivor", s.survivor);
  get_optional(j, "de_best", s.de_best);
  get_optional(j, "review_enabled", s.review_enabled);
  get_optional(j, "review_timeout_ms", s.review_timeout_ms);
}

void to_json(json& j, const RunConfig& c) { to_json(j, to_spec(c)); }

json ledger_to_json(const TokenLedger& ledger) { return json(ledger.entries()); }

TokenLedger ledger_from_json(const json& j) {
  TokenLedger ledger;
  for (const auto& e : j) ledger.append(e.get<LedgerEntry>());
  return ledger;
}

}  // namespace promptevo

namespace promptevo::operators {

void to_json(json& j, const OperatorTemplate& t) {
  j = json{{"algorithm", to_string(t.algorithm)},
           {"version", t.version},
           {"coi", t.coi},
           {"system_message", t.system_message},
           {"steps", t.steps}};
  if (!t.note.empty()) j["note"] = t.note;
}

void from_json(const json& j, OperatorTemplate& t) {
  t.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  t.version = j.at("version").get<std::string>();
  t.coi = j.at("coi").get<bool>();
  t.system_message = j.value("system_message", std::string());
  t.steps = j.at("steps").get<std::vector<StepTemplate>>();
  t.note = j.value("note", std::string());
}

void to_json(json& j, const EvolutionStepRecord& r) {
  j = json{{"step", r.step},
           {"instruction", r.instruction},
           {"response", r.response},
           {"verdicts", r.verdicts},
           {"attempts", r.attempts},
           {"accepted", r.accepted},
           {"ledger_indices", r.ledger_indices},
           {"extraction_retried", r.extraction_retried}};
  j["original_response"] = r.original_response ? json(*r.original_response) : json(nullptr);
}

void from_json(const json& j, EvolutionStepRecord& r) {
  r.step = j.at("step").get<std::size_t>();
  r.instruction = j.at("instruction").get<std::string>();
  r.response = j.at("response").get<std::string>();
  r.verdicts = j.at("verdicts").get<std::vector<judge::Verdict>>();
  r.attempts = j.at("attempts").get<int>();
  r.accepted = j.at("accepted").get<bool>();
  r.ledger_indices = j.at("ledger_indices").get<std::vector<std::size_t>>();
  r.extraction_retried = j.value("extraction_retried", false);
  r.original_response.reset();
  if (auto it = j.find("original_response"); it != j.end() && !it->is_null())
    r.original_response = it->get<std::string>();
}

json registry_to_json(const TemplateRegistry& registry) {
  json templates = json::array();
  for (const auto& [key, t] : registry.all()) templates.push_back(t);
  return json{{"paraphrase_instruction", registry.paraphrase_instruction()},
              {"templates", templates}};
}

TemplateRegistry registry_from_json(const json& j) {
  TemplateRegistry registry;
  registry.set_paraphrase_instruction(j.at("paraphrase_instruction").get<std::string>());
  for (const auto& t : j.at("templates")) registry.put(t.get<OperatorTemplate>());
  return registry;
}

}  // namespace promptevo::operators

namespace promptevo::judge {

void to_json(json& j, const Verdict& v) {
  j = json{{"decision", to_string(v.decision)},
           {"explanation", v.explanation},
           {"raw", v.raw},
           {"unparseable", v.unparseable}};
}

void from_json(const json& j, Verdict& v) {
  v.decision = j.at("decision").get<std::string>() == "good" ? Decision::kGood : Decision::kBad;
  v.explanation = j.at("explanation").get<std::string>();
  v.raw = j.at("raw").get<std::string>();
  v.unparseable = j.value("unparseable", false);
}

}  // namespace promptevo::judge

namespace promptevo::eval {

void to_json(json& j, const SampleScoreTrace& t) {
  json scores = json::array();
  for (const auto& e : t.entries()) scores.push_back(json::array({e.sample_id, e.score}));
  j = json{{"prompt_id", t.prompt_id()}, {"scores", scores}, {"complete", t.complete()}};
}

void from_json(const json& j, SampleScoreTrace& t) {
  t = SampleScoreTrace(j.at("prompt_id").get<std::string>());
  for (const auto& pair : j.at("scores"))
    t.push(pair.at(0).get<std::string>(), pair.at(1).get<double>());
  t.set_complete(j.at("complete").get<bool>());
}

void to_json(json& j, const FitnessResult& r) {
  j = json{{"prompt_id", r.prompt_id},
           {"fitness", r.fitness},
           {"samples_used", r.samples_used},
           {"dataset_size", r.dataset_size},
           {"stop_reason", to_string(r.stop_reason)},
           {"trace", r.trace},
           {"tokens", r.tokens},
           {"calls", r.calls},
           {"ledger_indices", r.ledger_indices}};
}

void from_json(const json& j, FitnessResult& r) {
  r.prompt_id = j.at("prompt_id").get<std::string>();
  r.fitness = j.at("fitness").get<double>();
  r.samples_used = j.at("samples_used").get<std::size_t>();
  r.dataset_size = j.at("dataset_size").get<std::size_t>();
  r.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
  r.trace = j.at("trace").get<SampleScoreTrace>();
  r.tokens = j.at("tokens").get<Usage>();
  r.calls = j.at("calls").get<std::size_t>();
  r.ledger_indices = j.at("ledger_indices").get<std::vector<std::size_t>>();
}

}  // namespace promptevo::eval
