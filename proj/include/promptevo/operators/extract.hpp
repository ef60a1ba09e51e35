#pragma once

#include <stdexcept>
#include <string>

namespace promptevo::operators {

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Child prompt from an operator response: the content of the last
/// <prompt>...</prompt> region, else the last non-empty line with list
/// markers, a leading "label:" and surrounding quotes removed.
std::string extract_final_prompt(const std::string& response);

}  // namespace promptevo::operators
