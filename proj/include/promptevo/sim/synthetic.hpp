#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "promptevo/core/types.hpp"
#include "promptevo/llm/scripted_gateway.hpp"

namespace promptevo::sim {

/// A toy optimization problem with a known optimum.
///
/// A prompt is a sequence of words, one per position, each drawn from a small
/// per-position vocabulary. A hidden target fixes the right word for every
/// position and a prompt's quality is the fraction of positions it gets
/// right. Sample k asks for the word at position k mod L, so full evaluation
/// measures exactly that fraction.
///
/// The world scripts a mock gateway: evaluation answers with the prompt's
/// word at the asked position, and the GA/DE operator steps, paraphrases and
/// judge calls apply seeded edits driven by each call's decoding seed.
class SyntheticWorld {
 public:
  struct Options {
    std::size_t positions = 10;
    std::size_t choices = 2;
    std::size_t samples_per_position = 4;
    std::size_t base_prompts = 4;
    /// Probability that a mutation step rewrites one position.
    double mutation_rate = 1.0;
    std::uint64_t seed = 1;
  };

  explicit SyntheticWorld(Options options);
  SyntheticWorld() : SyntheticWorld(Options{}) {}

  TaskSpec task() const;
  const std::vector<Sample>& dataset() const { return dataset_; }
  const std::string& target() const { return target_; }

  /// Fraction of positions matching the target.
  double similarity(const std::string& prompt) const;
  /// Best similarity any prompt expressible in the vocabulary can reach.
  double attainable_max() const { return 1.0; }

  /// Registers responders for every call kind a run makes.
  void script(llm::ScriptedGateway& gateway) const;

  /// Individual behaviours, exposed for tests.
  std::string answer(const std::string& prompt, std::size_t position) const;
  std::string crossover(const std::string& a, const std::string& b, std::uint64_t seed) const;
  std::string mutate(const std::string& prompt, std::uint64_t seed) const;

 private:
  std::vector<std::string> words(const std::string& prompt) const;
  std::string join(const std::vector<std::string>& words) const;
  std::string random_prompt(std::mt19937_64& rng) const;

  Options options_;
  std::vector<std::vector<std::string>> vocabulary_;
  std::string target_;
  std::vector<std::string> base_prompts_;
  std::vector<Sample> dataset_;
};

}  // namespace promptevo::sim
