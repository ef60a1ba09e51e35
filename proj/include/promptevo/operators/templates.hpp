#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "promptevo/core/types.hpp"

namespace promptevo::operators {

/// One worked instruction/response pair shown to the model before the real step.
struct Exchange {
  std::string instruction;
  std::string response;

  bool operator==(const Exchange&) const = default;
};

struct StepTemplate {
  std::string instruction;
  /// Index d of this list lines up with index d of every other step's list:
  /// together they form demonstration d of the whole chain.
  std::vector<Exchange> demonstrations;

  bool operator==(const StepTemplate&) const = default;
};

/// A versioned instruction chain implementing one evolutionary operator.
struct OperatorTemplate {
  Algorithm algorithm = Algorithm::kGA;
  std::string version;
  bool coi = true;
  std::string system_message;
  std::vector<StepTemplate> steps;
  /// Free-text remark on where the wording comes from.
  std::string note;

  bool operator==(const OperatorTemplate&) const = default;
};

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Bindings = std::map<std::string, std::string>;

/// Placeholder names an operator may reference: GA binds the two parents,
/// DE additionally binds the best and the base (target) prompt.
std::vector<std::string> bindable_placeholders(Algorithm algorithm);

/// Names of `{placeholder}` occurrences in `text`; `{{` and `}}` are literal braces.
std::vector<std::string> placeholders(const std::string& text);

/// Substitutes every placeholder; throws TemplateError naming the first unbound one.
std::string render_instruction(const std::string& text, const Bindings& bindings);

/// Expected step count: CoI DE 4, CoI GA 2, single-step variants 1.
std::size_t expected_steps(Algorithm algorithm, bool coi);

/// Throws TemplateError describing the first structural problem found.
void validate_template(const OperatorTemplate& tmpl);

/// Versioned operator templates plus the paraphrase instruction.
class TemplateRegistry {
 public:
  static TemplateRegistry builtin();
  /// Loads every `*.json` file in `dir`; entries override built-ins with the same key.
  static TemplateRegistry load_directory(const std::filesystem::path& dir,
                                         bool include_builtins = true);

  void put(OperatorTemplate tmpl);
  bool contains(const std::string& version, bool coi) const;
  const OperatorTemplate& get(const std::string& version, bool coi) const;
  OperatorTemplate& get_mutable(const std::string& version, bool coi);
  std::vector<std::string> versions() const;
  const std::map<std::pair<std::string, bool>, OperatorTemplate>& all() const { return templates_; }

  const std::string& paraphrase_instruction() const { return paraphrase_; }
  void set_paraphrase_instruction(std::string text);

  /// Writes one `<version>.json` file per version holding both chain variants.
  void export_directory(const std::filesystem::path& dir) const;

  bool operator==(const TemplateRegistry&) const = default;

 private:
  std::map<std::pair<std::string, bool>, OperatorTemplate> templates_;
  std::string paraphrase_;
};

/// Placeholder: {prompt}.
extern const std::string kDefaultParaphraseInstruction;

/// Refinement clauses added to DE step 1 through human review.
extern const std::string kDifferencesAsPhrasesClause;
extern const std::string kNoSimilaritiesClause;

}  // namespace promptevo::operators
