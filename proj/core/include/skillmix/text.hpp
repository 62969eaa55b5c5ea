#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace skillmix {

std::string_view trim(std::string_view s);

/// Number of Unicode code points in UTF-8 text (continuation bytes are not
/// counted). This is the "character length" used throughout the stats.
std::size_t utf8_length(std::string_view s);

/// Lowercase letters/digits joined by single underscores: "critical_thinking".
bool is_snake_case(std::string_view s);

/// Lowercases ASCII letters and collapses every run of other characters
/// into one underscore, trimming leading/trailing underscores:
/// "Information Technology (IT)" -> "information_technology_it".
std::string normalize_snake_case(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Strips list decoration from one line of an LLM-produced list: bullets,
/// "1." / "1)" numbering, surrounding backticks, quotes and bold markers.
std::string strip_list_decoration(std::string_view line);

}  // namespace skillmix
