#include "skillmix/templates.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <vector>

#include "skillmix/errors.hpp"

#ifndef SKILLMIX_DEFAULT_DATA_DIR
#define SKILLMIX_DEFAULT_DATA_DIR "data"
#endif
#ifndef SKILLMIX_INSTALL_DATA_DIR
#define SKILLMIX_INSTALL_DATA_DIR "/usr/local/share/skillmix"
#endif

namespace skillmix {
namespace {

bool is_placeholder_char(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }

// Length of a "{lower_snake}" token starting at s[pos], or 0.
std::size_t placeholder_length(std::string_view s, std::size_t pos) {
  if (s[pos] != '{') return 0;
  std::size_t i = pos + 1;
  while (i < s.size() && is_placeholder_char(s[i])) ++i;
  if (i == pos + 1 || i >= s.size() || s[i] != '}') return 0;
  return i - pos + 1;
}

}  // namespace

std::string render_template(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t len = placeholder_length(text, i);
    if (len == 0) {
      out.push_back(text[i++]);
      continue;
    }
    const std::string name(text.substr(i + 1, len - 2));
    if (auto it = values.find(name); it != values.end()) {
      out += it->second;
    } else {
      missing.push_back(name);
      out.append(text.substr(i, len));
    }
    i += len;
  }
  if (!missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "{" : ", {") + m + "}";
    throw TemplateError("unfilled template placeholder(s): " + names);
  }
  return out;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("template directory '" + dir.string() + "' does not exist");
  static const std::regex kName(R"(([a-z0-9_]+)\.v([0-9]+)\.txt)");
  TemplateLibrary lib;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string file = entry.path().filename().string();
    std::smatch m;
    if (!entry.is_regular_file() || !std::regex_match(file, m, kName)) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw IoError("cannot read template '" + entry.path().string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    // Files end with one newline for editor friendliness; it is not part of the prompt.
    if (!text.empty() && text.back() == '\n') text.pop_back();
    lib.put(m[1].str(), std::stoi(m[2].str()), std::move(text));
  }
  return lib;
}

const TemplateLibrary& TemplateLibrary::shipped() {
  static const TemplateLibrary lib = load(data_dir() / "templates");
  return lib;
}

void TemplateLibrary::put(std::string name, int version, std::string text) {
  templates_[std::move(name)][version] = std::move(text);
}

const std::string& TemplateLibrary::get(std::string_view name, int version) const {
  auto it = templates_.find(name);
  if (it == templates_.end() || it->second.empty()) {
    throw TemplateError("no prompt template named '" + std::string(name) + "'");
  }
  if (version == 0) return it->second.rbegin()->second;
  auto v = it->second.find(version);
  if (v == it->second.end()) {
    throw TemplateError("prompt template '" + std::string(name) + "' has no version " + std::to_string(version));
  }
  return v->second;
}

int TemplateLibrary::latest_version(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end() || it->second.empty()) {
    throw TemplateError("no prompt template named '" + std::string(name) + "'");
  }
  return it->second.rbegin()->first;
}

bool TemplateLibrary::contains(std::string_view name) const { return templates_.find(name) != templates_.end(); }

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("SKILLMIX_DATA_DIR"); env != nullptr && *env != '\0') return env;
  // Prefer the source tree when it still exists, else the installed copy.
  const std::filesystem::path source = SKILLMIX_DEFAULT_DATA_DIR;
  if (std::filesystem::is_directory(source / "templates")) return source;
  const std::filesystem::path installed = SKILLMIX_INSTALL_DATA_DIR;
  if (std::filesystem::is_directory(installed / "templates")) return installed;
  // A relocated install: <prefix>/bin/<exe> next to <prefix>/share/skillmix.
  std::error_code ec;
  const auto exe = std::filesystem::read_symlink("/proc/self/exe", ec);
  if (!ec) {
    const auto relocated = exe.parent_path().parent_path() / "share" / "skillmix";
    if (std::filesystem::is_directory(relocated / "templates")) return relocated;
  }
  return installed;
}

}  // namespace skillmix
