#include "promptevo/operators/templates.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "promptevo/serialization.hpp"

namespace promptevo::operators {

const std::string kDefaultParaphraseInstruction =
    "Paraphrase the following prompt, keeping its meaning: {prompt}\n"
    "Wrap the paraphrased prompt with <prompt> and </prompt>.";

const std::string kDifferencesAsPhrasesClause =
    "Output a list of all different parts and make sure that differences are only in the form "
    "of words and phrases.";
const std::string kNoSimilaritiesClause =
    "If the same phrase appears in both prompts, do not list it, i.e., do not list similarities.";

namespace {

const char* const kSystemMessage =
    "You are an expert prompt engineer. You improve task instructions for language models "
    "by following the given steps exactly.";

// Worked example shared by the demonstrations. The parents are the two
// five-class sentiment prompts used when the DE step-1 refinements were made.
const char* const kDemoPrompt1 =
    "Analyze the sentence and categorize it into one of five categories based on the "
    "sentiment: terrible, bad, okay, good, or great.";
const char* const kDemoPrompt2 =
    "Classify the given review into one of five categories: extremely negative (terrible), "
    "somewhat negative (bad), neutral (okay), somewhat positive (good), or extremely positive "
    "(great).";
const char* const kDemoBest =
    "Read the review and decide whether its sentiment is terrible, bad, okay, good, or great.";
const char* const kDemoBase =
    "Given a movie review, choose its sentiment from terrible, bad, okay, good, great.";

const char* const kDemoDifferences =
    "Different parts:\n"
    "- \"sentence\" vs \"review\"\n"
    "- \"analyze\" vs \"classify\"\n"
    "- \"terrible, bad, okay, good, or great\" vs \"extremely negative (terrible), somewhat "
    "negative (bad), neutral (okay), somewhat positive (good), or extremely positive (great)\"\n"
    "- \"based on the sentiment\" only appears in Prompt 1";
const char* const kDemoMutations =
    "Mutated parts:\n"
    "- \"sentence\" vs \"review\" -> \"text\"\n"
    "- \"analyze\" vs \"classify\" -> \"assess\"\n"
    "- the category list -> \"very negative, negative, neutral, positive, or very positive\"\n"
    "- \"based on the sentiment\" -> \"according to the expressed sentiment\"";
const char* const kDemoCombined =
    "New prompt: Assess the text and decide whether its expressed sentiment is very negative, "
    "negative, neutral, positive, or very positive.";
const char* const kDemoFinal =
    "<prompt>Assess the given movie review and choose its expressed sentiment from terrible, "
    "bad, okay, good, or great.</prompt>";
const char* const kDemoCrossover =
    "New prompt: Classify the given review into one of five sentiment categories: terrible, "
    "bad, okay, good, or great.";
const char* const kDemoMutated =
    "<prompt>Categorize the review by its overall sentiment as terrible, bad, okay, good, or "
    "great.</prompt>";

std::string de_step1(const std::vector<std::string>& clauses) {
  std::string text =
      "Step 1: Identify the different parts between Prompt 1 and Prompt 2:\n"
      "Prompt 1: {prompt1}\n"
      "Prompt 2: {prompt2}";
  for (const auto& c : clauses) text += "\n" + c;
  return text;
}

const char* const kDeStep2 =
    "Step 2: Randomly mutate the different parts identified in Step 1. Output one mutated "
    "version of each different part.";
const char* const kDeStep3 =
    "Step 3: Combine the mutated parts with Prompt 3: selectively replace parts of Prompt 3 "
    "with the mutated parts from Step 2 and generate a new prompt.\n"
    "Prompt 3: {best_prompt}";
const char* const kDeStep4 =
    "Step 4: Cross over the prompt generated in Step 3 with the following basic prompt and "
    "generate a final prompt bracketed with <prompt> and </prompt>.\n"
    "Basic Prompt: {base_prompt}";

std::string ga_step1(const std::vector<std::string>& clauses) {
  std::string text =
      "Step 1: Cross over the following prompts and generate a new prompt:\n"
      "Prompt 1: {prompt1}\n"
      "Prompt 2: {prompt2}";
  for (const auto& c : clauses) text += "\n" + c;
  return text;
}

std::string ga_step2(const std::vector<std::string>& clauses) {
  std::string text =
      "Step 2: Mutate the prompt generated in Step 1 and generate a final prompt bracketed with "
      "<prompt> and </prompt>.";
  for (const auto& c : clauses) text += "\n" + c;
  return text;
}

Bindings demo_bindings() {
  return {{"prompt1", kDemoPrompt1},
          {"prompt2", kDemoPrompt2},
          {"best_prompt", kDemoBest},
          {"base_prompt", kDemoBase}};
}

StepTemplate step_with_demo(std::string instruction, std::string demo_response) {
  StepTemplate step;
  step.demonstrations.push_back({render_instruction(instruction, demo_bindings()),
                                 std::move(demo_response)});
  step.instruction = std::move(instruction);
  return step;
}

OperatorTemplate de_coi(const std::string& version, const std::vector<std::string>& clauses) {
  OperatorTemplate t{Algorithm::kDE, version, true, kSystemMessage, {}, {}};
  t.steps.push_back(step_with_demo(de_step1(clauses), kDemoDifferences));
  t.steps.push_back(step_with_demo(kDeStep2, kDemoMutations));
  t.steps.push_back(step_with_demo(kDeStep3, kDemoCombined));
  t.steps.push_back(step_with_demo(kDeStep4, kDemoFinal));
  return t;
}

OperatorTemplate de_single(const std::string& version, const std::vector<std::string>& clauses) {
  std::string text =
      "Please follow the instruction step-by-step to generate a better prompt.\n"
      "1. Identify the different parts between Prompt 1 and Prompt 2:\n"
      "Prompt 1: {prompt1}\n"
      "Prompt 2: {prompt2}\n";
  for (const auto& c : clauses) text += c + "\n";
  text +=
      "2. Randomly mutate the different parts.\n"
      "3. Combine the different parts with Prompt 3, selectively replace it with the different "
      "parts in step 2 and generate a new prompt.\n"
      "Prompt 3: {best_prompt}\n"
      "4. Cross over the prompt in step 3 with the following basic prompt and generate a final "
      "prompt bracketed with <prompt> and </prompt>:\n"
      "Basic Prompt: {base_prompt}";
  std::string response = std::string("1. ") + kDemoDifferences + "\n2. " + kDemoMutations +
                         "\n3. " + kDemoCombined + "\n4. " + kDemoFinal;
  OperatorTemplate t{Algorithm::kDE, version, false, kSystemMessage, {}, {}};
  t.steps.push_back(step_with_demo(text, response));
  return t;
}

OperatorTemplate ga_coi(const std::string& version, const std::vector<std::string>& step1_clauses,
                        const std::vector<std::string>& step2_clauses) {
  OperatorTemplate t{Algorithm::kGA, version, true, kSystemMessage, {}, {}};
  t.steps.push_back(step_with_demo(ga_step1(step1_clauses), kDemoCrossover));
  t.steps.push_back(step_with_demo(ga_step2(step2_clauses), kDemoMutated));
  return t;
}

OperatorTemplate ga_single(const std::string& version,
                           const std::vector<std::string>& step1_clauses,
                           const std::vector<std::string>& step2_clauses) {
  std::string text =
      "Please follow the instruction step-by-step to generate a better prompt.\n"
      "1. Cross over the following prompts and generate a new prompt:\n"
      "Prompt 1: {prompt1}\n"
      "Prompt 2: {prompt2}\n";
  for (const auto& c : step1_clauses) text += c + "\n";
  text +=
      "2. Mutate the prompt generated in Step 1 and generate a final prompt bracketed with "
      "<prompt> and </prompt>.";
  for (const auto& c : step2_clauses) text += "\n" + c;
  std::string response = std::string("1. ") + kDemoCrossover + "\n2. " + kDemoMutated;
  OperatorTemplate t{Algorithm::kGA, version, false, kSystemMessage, {}, {}};
  t.steps.push_back(step_with_demo(text, response));
  return t;
}

// GA1 wording is a reconstruction of a single feedback round on GA.
const char* const kGaKeepFormatClause =
    "Keep the label set and the output format required by both prompts.";
const char* const kGaOnlyPromptClause =
    "Output only the final prompt and no explanation.";

bool is_identifier_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

// Calls on_text for literal runs and on_placeholder for each {name}.
template <typename OnText, typename OnPlaceholder>
void scan(const std::string& text, OnText on_text, OnPlaceholder on_placeholder) {
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if ((c == '{' || c == '}') && i + 1 < text.size() && text[i + 1] == c) {
      on_text(std::string(1, c));
      i += 2;
      continue;
    }
    if (c == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && is_identifier_char(text[j])) ++j;
      if (j < text.size() && text[j] == '}' && j > i + 1) {
        on_placeholder(text.substr(i + 1, j - i - 1));
        i = j + 1;
        continue;
      }
    }
    on_text(std::string(1, c));
    ++i;
  }
}

}  // namespace

std::vector<std::string> bindable_placeholders(Algorithm algorithm) {
  if (algorithm == Algorithm::kGA) return {"prompt1", "prompt2"};
  return {"prompt1", "prompt2", "best_prompt", "base_prompt"};
}

std::vector<std::string> placeholders(const std::string& text) {
  std::vector<std::string> names;
  scan(text, [](const std::string&) {}, [&](const std::string& name) { names.push_back(name); });
  return names;
}

std::string render_instruction(const std::string& text, const Bindings& bindings) {
  std::string out;
  out.reserve(text.size());
  scan(
      text, [&](const std::string& literal) { out += literal; },
      [&](const std::string& name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw TemplateError("unbound placeholder {" + name + "}");
        out += it->second;
      });
  return out;
}

std::size_t expected_steps(Algorithm algorithm, bool coi) {
  if (!coi) return 1;
  return algorithm == Algorithm::kDE ? 4 : 2;
}

void validate_template(const OperatorTemplate& tmpl) {
  const auto where = tmpl.version + (tmpl.coi ? " (coi)" : " (single)");
  if (tmpl.version.empty()) throw TemplateError("template version must be non-empty");
  auto want = expected_steps(tmpl.algorithm, tmpl.coi);
  if (tmpl.steps.size() != want) {
    throw TemplateError(where + ": expected " + std::to_string(want) + " steps, found " +
                        std::to_string(tmpl.steps.size()));
  }
  auto allowed = bindable_placeholders(tmpl.algorithm);
  for (std::size_t t = 0; t < tmpl.steps.size(); ++t) {
    const auto& step = tmpl.steps[t];
    if (step.instruction.empty())
      throw TemplateError(where + ": step " + std::to_string(t + 1) + " has no instruction");
    for (const auto& name : placeholders(step.instruction)) {
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw TemplateError(where + ": step " + std::to_string(t + 1) +
                            " references unbindable placeholder {" + name + "}");
      }
    }
    for (const auto& demo : step.demonstrations) {
      if (demo.instruction.empty() || demo.response.empty())
        throw TemplateError(where + ": step " + std::to_string(t + 1) + " has an empty demonstration");
    }
  }
}

TemplateRegistry TemplateRegistry::builtin() {
  TemplateRegistry r;
  const std::vector<std::string> de1 = {kDifferencesAsPhrasesClause};
  const std::vector<std::string> de2 = {kDifferencesAsPhrasesClause, kNoSimilaritiesClause};
  r.put(de_coi("DE", {}));
  r.put(de_single("DE", {}));
  r.put(de_coi("DE1", de1));
  r.put(de_single("DE1", de1));
  r.put(de_coi("DE2", de2));
  r.put(de_single("DE2", de2));
  r.put(ga_coi("GA", {}, {}));
  r.put(ga_single("GA", {}, {}));
  r.put(ga_coi("GA1", {kGaKeepFormatClause}, {kGaOnlyPromptClause}));
  r.put(ga_single("GA1", {kGaKeepFormatClause}, {kGaOnlyPromptClause}));
  for (auto& [key, t] : r.templates_) {
    t.note = t.algorithm == Algorithm::kDE
                 ? "Step 1 uses the published wording; the later steps are a reconstruction."
                 : "Reconstructed wording.";
  }
  r.paraphrase_ = kDefaultParaphraseInstruction;
  return r;
}

void TemplateRegistry::put(OperatorTemplate tmpl) {
  validate_template(tmpl);
  auto key = std::make_pair(tmpl.version, tmpl.coi);
  templates_.insert_or_assign(std::move(key), std::move(tmpl));
}

bool TemplateRegistry::contains(const std::string& version, bool coi) const {
  return templates_.count({version, coi}) > 0;
}

const OperatorTemplate& TemplateRegistry::get(const std::string& version, bool coi) const {
  auto it = templates_.find({version, coi});
  if (it == templates_.end())
    throw TemplateError("unknown template " + version + (coi ? " (coi)" : " (single)"));
  return it->second;
}

OperatorTemplate& TemplateRegistry::get_mutable(const std::string& version, bool coi) {
  return const_cast<OperatorTemplate&>(std::as_const(*this).get(version, coi));
}

std::vector<std::string> TemplateRegistry::versions() const {
  std::set<std::string> names;
  for (const auto& [key, _] : templates_) names.insert(key.first);
  return {names.begin(), names.end()};
}

void TemplateRegistry::set_paraphrase_instruction(std::string text) {
  auto names = placeholders(text);
  for (const auto& n : names)
    if (n != "prompt") throw TemplateError("paraphrase instruction may only use {prompt}, found {" + n + "}");
  if (std::find(names.begin(), names.end(), "prompt") == names.end())
    throw TemplateError("paraphrase instruction must reference {prompt}");
  paraphrase_ = std::move(text);
}

TemplateRegistry TemplateRegistry::load_directory(const std::filesystem::path& dir,
                                                  bool include_builtins) {
  TemplateRegistry r = include_builtins ? builtin() : TemplateRegistry{};
  if (!include_builtins) r.paraphrase_ = kDefaultParaphraseInstruction;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    std::ifstream in(path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
      if (path.stem() == "paraphrase") {
        r.set_paraphrase_instruction(doc.at("instruction").get<std::string>());
        continue;
      }
      for (const auto& variant : {"coi", "single"}) {
        if (!doc.contains(variant)) continue;
        OperatorTemplate t;
        t.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
        t.version = doc.at("version").get<std::string>();
        t.system_message = doc.value("system_message", std::string());
        t.note = doc.value("note", std::string());
        t.coi = std::string(variant) == "coi";
        t.steps = doc.at(variant).at("steps").get<std::vector<StepTemplate>>();
        r.put(std::move(t));
      }
    } catch (const std::exception& e) {
      throw TemplateError(path.string() + ": " + e.what());
    }
  }
  return r;
}

void TemplateRegistry::export_directory(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::map<std::string, nlohmann::ordered_json> docs;
  for (const auto& [key, t] : templates_) {
    auto& doc = docs[key.first];
    doc["version"] = t.version;
    doc["algorithm"] = to_string(t.algorithm);
    doc["system_message"] = t.system_message;
    if (!t.note.empty()) doc["note"] = t.note;
    auto& steps = doc[t.coi ? "coi" : "single"]["steps"];
    steps = nlohmann::ordered_json::array();
    for (const auto& step : t.steps) {
      nlohmann::ordered_json demos = nlohmann::ordered_json::array();
      for (const auto& d : step.demonstrations)
        demos.push_back({{"instruction", d.instruction}, {"response", d.response}});
      steps.push_back({{"instruction", step.instruction}, {"demonstrations", demos}});
    }
  }
  for (auto& [version, doc] : docs) {
    std::ofstream out(dir / (version + ".json"));
    out << doc.dump(2) << '\n';
  }
  if (paraphrase_.empty()) return;
  std::ofstream out(dir / "paraphrase.json");
  out << nlohmann::ordered_json{{"instruction", paraphrase_}}.dump(2) << '\n';
}

}  // namespace promptevo::operators
