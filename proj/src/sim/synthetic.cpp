#include "promptevo/sim/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "promptevo/core/text.hpp"
#include "promptevo/operators/extract.hpp"

namespace promptevo::sim {

namespace {

const std::vector<std::string> kStems = {
    "classify", "the",    "review",  "sentiment", "carefully", "using",   "one",    "label",
    "from",     "the",    "options", "below",     "then",      "answer",  "briefly", "now",
    "please",   "read",   "each",    "sentence"};

const std::vector<std::string> kVariants = {"", "ly", "s", "ing", "ed", "er"};

std::string line_after(const std::string& text, const std::string& key) {
  auto at = text.find(key);
  if (at == std::string::npos) return "";
  at += key.size();
  auto end = text.find('\n', at);
  return text.substr(at, end == std::string::npos ? std::string::npos : end - at);
}

std::string after_marker(const std::string& text, const std::string& marker) {
  auto at = text.rfind(marker);
  if (at == std::string::npos) return trim(text);
  auto rest = text.substr(at + marker.size());
  auto end = rest.find('\n');
  return trim(rest.substr(0, end));
}

const llm::Message& last_user(const llm::Transcript& t) { return t.back(); }

/// Response that preceded the final instruction, or empty for the first step.
std::string previous_response(const llm::Transcript& t) {
  if (t.size() >= 2 && t[t.size() - 2].role == llm::Role::kAssistant) return t[t.size() - 2].content;
  return "";
}

}  // namespace

SyntheticWorld::SyntheticWorld(Options options) : options_(options) {
  if (options_.positions == 0 || options_.choices < 2 || options_.samples_per_position == 0)
    throw std::invalid_argument("synthetic world needs positions, at least 2 choices and samples");
  std::mt19937_64 rng(options_.seed);
  for (std::size_t p = 0; p < options_.positions; ++p) {
    std::vector<std::string> options;
    const auto& stem = kStems[p % kStems.size()];
    for (std::size_t c = 0; c < options_.choices; ++c) {
      auto word = stem + kVariants[c % kVariants.size()];
      if (c >= kVariants.size()) word += std::to_string(c / kVariants.size());
      if (p >= kStems.size()) word += std::to_string(p / kStems.size());
      options.push_back(word);
    }
    vocabulary_.push_back(std::move(options));
  }
  target_ = random_prompt(rng);
  for (std::size_t i = 0; i < options_.base_prompts; ++i) base_prompts_.push_back(random_prompt(rng));

  char id[32];
  std::size_t n = 0;
  for (std::size_t r = 0; r < options_.samples_per_position; ++r) {
    for (std::size_t p = 0; p < options_.positions; ++p) {
      std::snprintf(id, sizeof id, "s%04zu", ++n);
      const auto want = words(target_)[p];
      dataset_.push_back(Sample::make(id, "word at position " + std::to_string(p + 1), {want}));
    }
  }
}

std::string SyntheticWorld::random_prompt(std::mt19937_64& rng) const {
  std::vector<std::string> out;
  for (const auto& options : vocabulary_) {
    std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
    out.push_back(options[pick(rng)]);
  }
  return join(out);
}

std::vector<std::string> SyntheticWorld::words(const std::string& prompt) const {
  return split_words(prompt);
}

std::string SyntheticWorld::join(const std::vector<std::string>& w) const {
  std::string out;
  for (const auto& word : w) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

TaskSpec SyntheticWorld::task() const {
  TaskSpec t;
  t.name = "synthetic";
  t.kind = TaskKind::kGeneration;
  t.metric = "exact_match";
  t.base_prompts = base_prompts_;
  return t;
}

double SyntheticWorld::similarity(const std::string& prompt) const {
  const auto have = words(prompt);
  const auto want = words(target_);
  std::size_t hits = 0;
  for (std::size_t p = 0; p < want.size(); ++p) hits += p < have.size() && have[p] == want[p];
  return static_cast<double>(hits) / static_cast<double>(want.size());
}

std::string SyntheticWorld::answer(const std::string& prompt, std::size_t position) const {
  const auto have = words(prompt);
  return position < have.size() ? have[position] : "none";
}

std::string SyntheticWorld::crossover(const std::string& a, const std::string& b,
                                      std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  const auto wa = words(a);
  const auto wb = words(b);
  std::vector<std::string> out;
  const auto n = std::max(wa.size(), wb.size());
  for (std::size_t p = 0; p < n; ++p) {
    const bool from_a = std::bernoulli_distribution(0.5)(rng);
    if (p >= wb.size() || (from_a && p < wa.size())) {
      out.push_back(wa[p]);
    } else {
      out.push_back(wb[p]);
    }
  }
  return join(out);
}

std::string SyntheticWorld::mutate(const std::string& prompt, std::uint64_t seed) const {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  auto w = words(prompt);
  w.resize(vocabulary_.size(), vocabulary_.front().front());
  if (std::bernoulli_distribution(options_.mutation_rate)(rng)) {
    std::uniform_int_distribution<std::size_t> where(0, w.size() - 1);
    const auto p = where(rng);
    std::uniform_int_distribution<std::size_t> pick(0, vocabulary_[p].size() - 1);
    w[p] = vocabulary_[p][pick(rng)];
  }
  return join(w);
}

void SyntheticWorld::script(llm::ScriptedGateway& gateway) const {
  using llm::ScriptedGateway;
  const auto* self = this;

  gateway.register_responder(ScriptedGateway::any_contains("You are acting as a judge"),
                             [](const llm::Transcript&, const llm::DecodingParams&) {
                               return std::string("<judgement>good</judgement> The response follows the step.");
                             });

  gateway.register_responder(
      ScriptedGateway::last_contains("Paraphrase the following prompt"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        const auto& text = last_user(t).content;
        auto source = line_after(text, "keeping its meaning: ");
        return "<prompt>" + self->mutate(source, d.seed.value_or(0)) + "</prompt>";
      });

  // GA, chained.
  gateway.register_responder(
      ScriptedGateway::last_contains("Step 1: Cross over the following prompts"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        const auto& text = last_user(t).content;
        return "New prompt: " + self->crossover(line_after(text, "Prompt 1: "),
                                                line_after(text, "Prompt 2: "), d.seed.value_or(0));
      });
  gateway.register_responder(
      ScriptedGateway::last_contains("Step 2: Mutate the prompt generated in Step 1"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        auto child = after_marker(previous_response(t), "New prompt: ");
        return "<prompt>" + self->mutate(child, d.seed.value_or(0)) + "</prompt>";
      });

  // DE, chained. Step 1 lists differing positions, step 2 mutates them, step 3
  // writes them into the best prompt, step 4 crosses over with the base.
  gateway.register_responder(
      ScriptedGateway::last_contains("Step 1: Identify the different parts"),
      [self](const llm::Transcript& t, const llm::DecodingParams&) {
        const auto& text = last_user(t).content;
        auto a = self->words(line_after(text, "Prompt 1: "));
        auto b = self->words(line_after(text, "Prompt 2: "));
        std::string out = "Different parts:";
        for (std::size_t p = 0; p < std::min(a.size(), b.size()); ++p)
          if (a[p] != b[p]) out += "\n- " + std::to_string(p) + ": \"" + a[p] + "\" vs \"" + b[p] + "\"";
        return out;
      });
  gateway.register_responder(
      ScriptedGateway::last_contains("Step 2: Randomly mutate the different parts"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        std::mt19937_64 rng(d.seed.value_or(0));
        std::string out = "Mutated parts:";
        const auto prior = previous_response(t);
        std::size_t at = 0;
        while ((at = prior.find("\n- ", at)) != std::string::npos) {
          at += 3;
          const auto p = static_cast<std::size_t>(std::stoul(prior.substr(at)));
          if (p >= self->vocabulary_.size()) continue;
          const auto& options = self->vocabulary_[p];
          std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
          out += "\n- " + std::to_string(p) + ": " + options[pick(rng)];
        }
        return out;
      });
  gateway.register_responder(
      ScriptedGateway::last_contains("Step 3: Combine the mutated parts with Prompt 3"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        std::mt19937_64 rng(d.seed.value_or(0));
        auto best = self->words(line_after(last_user(t).content, "Prompt 3: "));
        const auto prior = previous_response(t);
        std::size_t at = 0;
        while ((at = prior.find("\n- ", at)) != std::string::npos) {
          at += 3;
          const auto p = static_cast<std::size_t>(std::stoul(prior.substr(at)));
          auto colon = prior.find(": ", at);
          auto end = prior.find('\n', colon);
          if (p < best.size() && std::bernoulli_distribution(0.5)(rng))
            best[p] = prior.substr(colon + 2, end == std::string::npos ? end : end - colon - 2);
        }
        return "New prompt: " + self->join(best);
      });
  gateway.register_responder(
      ScriptedGateway::last_contains("Step 4: Cross over the prompt generated in Step 3"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        auto combined = after_marker(previous_response(t), "New prompt: ");
        auto base = line_after(last_user(t).content, "Basic Prompt: ");
        return "<prompt>" + self->crossover(combined, base, d.seed.value_or(0)) + "</prompt>";
      });

  // Single-instruction variants run the whole operator in one reply.
  gateway.register_responder(
      ScriptedGateway::last_contains("1. Cross over the following prompts"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        const auto& text = last_user(t).content;
        auto child = self->crossover(line_after(text, "Prompt 1: "), line_after(text, "Prompt 2: "),
                                     d.seed.value_or(0));
        return "1. New prompt: " + child + "\n2. <prompt>" + self->mutate(child, d.seed.value_or(0)) +
               "</prompt>";
      });
  gateway.register_responder(
      ScriptedGateway::last_contains("1. Identify the different parts between Prompt 1 and Prompt 2"),
      [self](const llm::Transcript& t, const llm::DecodingParams& d) {
        const auto& text = last_user(t).content;
        auto mixed = self->crossover(line_after(text, "Prompt 1: "), line_after(text, "Prompt 2: "),
                                     d.seed.value_or(0));
        auto with_best = self->crossover(self->mutate(mixed, d.seed.value_or(0)),
                                         line_after(text, "Prompt 3: "), d.seed.value_or(0) + 1);
        auto final_prompt =
            self->crossover(with_best, line_after(text, "Basic Prompt: "), d.seed.value_or(0) + 2);
        return "4. <prompt>" + final_prompt + "</prompt>";
      });

  // Evaluation: answer with the prompt's word at the requested position.
  gateway.register_responder(
      ScriptedGateway::last_contains("\nInput: word at position "),
      [self](const llm::Transcript& t, const llm::DecodingParams&) {
        const auto& text = last_user(t).content;
        auto prompt = text.substr(0, text.find("\n\nInput: "));
        auto asked = text.rfind("Input: word at position ");
        auto position = std::stoul(text.substr(asked + std::string("Input: word at position ").size()));
        return self->answer(prompt, position - 1);
      });
}

}  // namespace promptevo::sim
