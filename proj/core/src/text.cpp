#include "skillmix/text.hpp"

#include <cctype>

namespace skillmix {
namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_lower_alnum(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }
}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool is_snake_case(std::string_view s) {
  if (s.empty() || s.front() == '_' || s.back() == '_') return false;
  char prev = '\0';
  for (char c : s) {
    if (c == '_') {
      if (prev == '_') return false;
    } else if (!is_lower_alnum(c)) {
      return false;
    }
    prev = c;
  }
  return true;
}

std::string normalize_snake_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_sep = false;
  for (char c : s) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (is_lower_alnum(lower)) {
      if (pending_sep && !out.empty()) out.push_back('_');
      pending_sep = false;
      out.push_back(lower);
    } else {
      pending_sep = true;
    }
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view s) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find('\n', start);
    auto line = s.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return lines;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string strip_list_decoration(std::string_view line) {
  line = trim(line);
  // Bullets.
  while (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == '+')) {
    if (line.size() >= 2 && line[0] == '*' && line[1] == '*') break;  // bold, handled below
    line = trim(line.substr(1));
  }
  // "12." or "12)" numbering.
  std::size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits > 0 && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
    line = trim(line.substr(digits + 1));
  }
  auto strip_pair = [&](std::string_view open, std::string_view close) {
    if (line.size() >= open.size() + close.size() && line.starts_with(open) && line.ends_with(close)) {
      line = trim(line.substr(open.size(), line.size() - open.size() - close.size()));
      return true;
    }
    return false;
  };
  for (bool changed = true; changed;) {
    changed = strip_pair("**", "**") || strip_pair("`", "`") || strip_pair("\"", "\"") || strip_pair("'", "'");
  }
  return std::string(line);
}

}  // namespace skillmix
