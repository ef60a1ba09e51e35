#include "promptevo/operators/extract.hpp"

#include <cctype>
#include <vector>

#include "promptevo/core/text.hpp"

namespace promptevo::operators {

namespace {

std::string strip_list_marker(std::string line) {
  std::size_t i = 0;
  if (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '+')) {
    i = 1;
  } else {
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) {
      ++i;
    } else {
      i = 0;
    }
  }
  return trim(std::string_view(line).substr(i));
}

// "Final prompt: ..." style prefixes: a short label ending in ':' with no quotes before it.
std::string strip_label(std::string line) {
  auto colon = line.find(':');
  if (colon == std::string::npos || colon > 40) return line;
  auto label = std::string_view(line).substr(0, colon);
  if (label.find('"') != std::string_view::npos || label.find('\'') != std::string_view::npos)
    return line;
  auto rest = trim(std::string_view(line).substr(colon + 1));
  return rest.empty() ? line : rest;
}

std::string strip_quotes(std::string text) {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"\"", "\""}, {"'", "'"}, {"`", "`"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}};
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [open, close] : pairs) {
      if (text.size() >= open.size() + close.size() && text.compare(0, open.size(), open) == 0 &&
          text.compare(text.size() - close.size(), close.size(), close) == 0) {
        text = trim(std::string_view(text).substr(open.size(), text.size() - open.size() - close.size()));
        changed = true;
      }
    }
  }
  return text;
}

}  // namespace

std::string extract_final_prompt(const std::string& response) {
  const auto lower = to_lower(response);
  const std::string open = "<prompt>";
  const std::string close = "</prompt>";
  auto close_pos = lower.rfind(close);
  if (close_pos != std::string::npos) {
    auto open_pos = lower.rfind(open, close_pos);
    if (open_pos != std::string::npos) {
      auto inner = trim(std::string_view(response).substr(open_pos + open.size(),
                                                          close_pos - open_pos - open.size()));
      if (!inner.empty()) return inner;
    }
  }

  std::string last;
  std::size_t start = 0;
  while (start <= response.size()) {
    auto end = response.find('\n', start);
    if (end == std::string::npos) end = response.size();
    auto line = trim(std::string_view(response).substr(start, end - start));
    if (!line.empty()) last = line;
    start = end + 1;
  }
  auto candidate = strip_quotes(strip_label(strip_list_marker(last)));
  // Tags left over from a malformed region are not part of the prompt.
  for (const auto& tag : {open, close}) {
    for (auto pos = to_lower(candidate).find(tag); pos != std::string::npos;
         pos = to_lower(candidate).find(tag))
      candidate.erase(pos, tag.size());
  }
  candidate = strip_quotes(trim(candidate));
  if (candidate.empty()) throw ExtractionError("no prompt found in operator response");
  return candidate;
}

}  // namespace promptevo::operators
