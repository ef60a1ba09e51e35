#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "promptevo/core/types.hpp"

namespace promptevo {

enum class EvaluationMode { kFull, kSubsample, kEarlyStopping };
enum class SampleOrdering { kNatural, kShortestFirst, kHardestFirst };
enum class SurvivorMode { kElitist, kGenerational };
enum class BestBinding { kBestSoFar, kGenerationBest };

std::string_view to_string(EvaluationMode mode);
std::string_view to_string(SampleOrdering ordering);
std::string_view to_string(SurvivorMode mode);
std::string_view to_string(BestBinding binding);
EvaluationMode parse_evaluation_mode(std::string_view text);
SampleOrdering parse_sample_ordering(std::string_view text);
SurvivorMode parse_survivor_mode(std::string_view text);
BestBinding parse_best_binding(std::string_view text);

inline constexpr double kDefaultEtaM = 1e-3;
inline constexpr double kDefaultEtaP = 1e-3;
inline constexpr int kDefaultWindow = 10;
inline constexpr int kDefaultPatience = 20;
inline constexpr int kDefaultPopulation = 10;
inline constexpr int kDefaultGenerations = 10;
inline constexpr double kDefaultEvolutionTemperature = 0.5;
inline constexpr int kDefaultJudgeRetries = 3;
inline constexpr int kDefaultMaxTokens = 1024;

/// How candidate prompts are scored against the validation set.
struct StrategyConfig {
  EvaluationMode mode = EvaluationMode::kEarlyStopping;
  SampleOrdering ordering = SampleOrdering::kNatural;
  double subsample_factor = 1.0 / 3.0;
  double eta_m = kDefaultEtaM;
  double eta_p = kDefaultEtaP;
  int window = kDefaultWindow;
  int patience = kDefaultPatience;

  bool operator==(const StrategyConfig&) const = default;
};

/// Fully resolved run configuration; obtain one through validate_config.
struct RunConfig {
  int population_size = kDefaultPopulation;
  int generations = kDefaultGenerations;
  Algorithm algorithm = Algorithm::kGA;
  std::string template_version = "GA";
  bool coi_enabled = true;
  bool judge_enabled = false;
  int judge_max_retries = kDefaultJudgeRetries;
  std::string judge_instruction;
  StrategyConfig strategy;
  double evolution_temperature = kDefaultEvolutionTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::uint64_t seed = 0;
  SurvivorMode survivor = SurvivorMode::kElitist;
  BestBinding de_best = BestBinding::kBestSoFar;
  bool review_enabled = false;
  int review_timeout_ms = 0;

  bool operator==(const RunConfig&) const = default;
};

/// User-supplied configuration. Unset fields take the documented defaults.
struct RunConfigSpec {
  std::optional<int> population_size;
  std::optional<int> generations;
  std::optional<std::string> algorithm;
  std::optional<std::string> template_version;
  std::optional<bool> coi_enabled;
  std::optional<bool> judge_enabled;
  std::optional<int> judge_max_retries;
  std::optional<std::string> judge_instruction;
  std::optional<std::string> evaluation_mode;
  std::optional<std::string> ordering;
  std::optional<double> subsample_factor;
  std::optional<double> eta_m;
  std::optional<double> eta_p;
  std::optional<int> window;
  std::optional<int> patience;
  std::optional<double> evolution_temperature;
  std::optional<int> max_tokens;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> survivor;
  std::optional<std::string> de_best;
  std::optional<bool> review_enabled;
  std::optional<int> review_timeout_ms;

  bool operator==(const RunConfigSpec&) const = default;
};

struct Violation {
  std::string field;
  std::string message;

  bool operator==(const Violation&) const = default;
};

struct ConfigValidation {
  std::optional<RunConfig> config;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

/// The judge instruction used when the configuration does not override it.
extern const std::string kDefaultJudgeInstruction;

/// Resolves defaults and checks every field plus the task invariants. All
/// violations are reported at once, each naming its field.
ConfigValidation validate_config(const RunConfigSpec& spec, const TaskSpec& task);

/// Inverse of validation: every field set explicitly.
RunConfigSpec to_spec(const RunConfig& config);

/// Task-only checks, shared with dataset loading.
std::vector<Violation> validate_task(const TaskSpec& task);

}  // namespace promptevo
