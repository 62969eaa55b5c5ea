#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace skillmix {

/// Substitutes {name} placeholders in one pass (substituted values are never
/// re-scanned). Throws TemplateError if a {lower_snake} placeholder remains,
/// whether unknown or simply not supplied.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& values);

/// Prompt templates shipped as plain-text files named "<name>.v<version>.txt".
class TemplateLibrary {
 public:
  /// Loads every "*.v*.txt" file in `dir`.
  static TemplateLibrary load(const std::filesystem::path& dir);
  /// The library shipped with the build (or install) tree.
  static const TemplateLibrary& shipped();

  /// Adds or replaces a template in memory (tests).
  void put(std::string name, int version, std::string text);

  /// Highest version of `name` unless `version` is given.
  const std::string& get(std::string_view name, int version = 0) const;
  int latest_version(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::string render(std::string_view name, const std::map<std::string, std::string>& values) const {
    return render_template(get(name), values);
  }

 private:
  std::map<std::string, std::map<int, std::string>, std::less<>> templates_;
};

/// Directory holding templates/, catalogs/ and fixtures/. Resolution order:
/// the SKILLMIX_DATA_DIR environment variable, then the build/install
/// location compiled into the library.
std::filesystem::path data_dir();

}  // namespace skillmix
