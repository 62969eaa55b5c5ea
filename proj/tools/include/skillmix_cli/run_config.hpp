#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "skillmix/catalog.hpp"
#include "skillmix/generator.hpp"
#include "skillmix/injection.hpp"
#include "skillmix/judge.hpp"
#include "skillmix/mixer.hpp"
#include "skillmix/provider.hpp"

namespace skillmix::cli {

inline constexpr int kRunConfigSchema = 1;

struct ProviderEntry {
  std::string name;
  /// "teacher" and/or "judge".
  std::vector<std::string> roles;
  ProviderConfig config;
};

struct ExtractionSection {
  CatalogMode mode = CatalogMode::kSda;
  std::optional<std::filesystem::path> seed_dataset;
  std::size_t sample = 0;
  std::size_t cluster_token_budget = 8000;
  std::size_t workers = 4;
};

struct JudgeSection {
  SwapPolicy swap = SwapPolicy::kSeeded;
  std::size_t workers = 4;
  int max_output_tokens = 16;
};

/// Declarative run description read from YAML. Relative paths resolve
/// against the config file's directory.
struct RunConfig {
  int schema_version = kRunConfigSchema;
  std::uint64_t seed = 0;
  std::filesystem::path base_dir = ".";
  std::filesystem::path output_dir = "out";
  std::vector<ProviderEntry> providers;
  std::optional<std::filesystem::path> catalog;
  std::optional<ExtractionSection> extraction;
  SamplePlan plan;
  GenerationConfig generation;
  std::optional<InjectionPlan> injection;
  JudgeSection judge;

  /// The provider carrying the role; ValidationError when none does.
  const ProviderEntry& with_role(const std::string& role) const;
};

/// Throws ValidationError with the offending key for any schema problem.
RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Schema version, exactly one teacher and one judge, existing paths.
void validate_run_config(const RunConfig& config);

/// Provider config for a role with the retry seed derived from the run seed.
ProviderConfig provider_for(const RunConfig& config, const std::string& role);

}  // namespace skillmix::cli
