#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace promptevo {

/// Number of Unicode code points in a UTF-8 string (continuation bytes are skipped).
std::size_t utf8_length(std::string_view text);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
bool is_blank(std::string_view text);

/// Splits on runs of ASCII whitespace.
std::vector<std::string> split_words(std::string_view text);
std::size_t word_count(std::string_view text);

/// 64-bit FNV-1a; stable across platforms, used for transcript hashes and seeds.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

}  // namespace promptevo
