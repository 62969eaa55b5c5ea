#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillmix/catalog.hpp"
#include "skillmix/provider.hpp"
#include "skillmix/templates.hpp"

namespace skillmix {

struct ExtractionOptions {
  /// Extraction replies are parsed, so they are requested deterministically.
  double temperature = 0.0;
  int max_output_tokens = 4096;
  std::size_t workers = 4;
  /// Upper bound on the estimated prompt tokens of one clustering batch.
  std::size_t cluster_token_budget = 8000;
  /// Stamped into the catalog provenance; left empty for reproducible files.
  std::optional<std::string> created_at;
  /// Defaults to TemplateLibrary::shipped().
  const TemplateLibrary* templates = nullptr;
};

/// Items parsed from a reply plus the non-fatal issues found on the way
/// (normalized names, dropped duplicates, empty lists).
template <typename T>
struct Extracted {
  std::vector<T> items;
  std::vector<std::string> warnings;
};

// ---- SDD: label seed examples, then cluster the labels ----

struct SkillLabel {
  std::string skill;
  std::string reason;
};

/// Parses the "<name of the skill>, reason: <reason>" answer shape. Throws
/// ParseError when the shape is absent and ValidationError when the name
/// is not snake_case.
SkillLabel parse_skill_label(std::string_view reply);

/// Labels one example. A reply lacking the answer shape gets one reminder
/// turn before ParseError.
SkillLabel label_skill_sdd(std::string_view example_text, Provider& provider, const std::string& task_id,
                           const ExtractionOptions& options = {});

/// Parses "Category name / Included skills / Rationale" blocks. Names are
/// snake-case-normalized.
std::vector<SkillCluster> parse_clusters(std::string_view reply);

/// Greedy batching of names so that each rendered clustering prompt stays
/// within `token_budget` (estimated at 4 characters per token).
std::vector<std::vector<std::string>> batch_for_budget(const std::vector<std::string>& names,
                                                       std::size_t token_budget, std::size_t overhead_tokens);

/// Clusters skill names, batching to the token budget and merging batches
/// by exact cluster name. The result partitions the input: members that
/// are not inputs are dropped, a skill claimed twice stays in its first
/// cluster, and unassigned inputs raise CoverageError listing them.
Extracted<SkillCluster> cluster_skills_sdd(const std::vector<std::string>& skill_names, Provider& provider,
                                           const ExtractionOptions& options = {});

struct SeedExample {
  std::string id;
  std::string text;
};

/// Reads a JSONL seed dataset (fields "text", or "instruction" plus an
/// optional "input") and draws `count` examples uniformly without
/// replacement under `seed`, returned in file order.
std::vector<SeedExample> sample_seed_examples(const std::filesystem::path& path, std::size_t count,
                                              std::uint64_t seed);

Extracted<SkillCatalog> build_sdd_catalog(const std::vector<SeedExample>& examples, Provider& provider,
                                          const ExtractionOptions& options = {});

// ---- SDA: topics -> skills per topic -> query types ----

/// One name per line; decoration and "name: description" tails stripped,
/// snake-case-normalized, deduplicated.
Extracted<std::string> parse_name_list(std::string_view reply);

/// "Name: description" per line; duplicate names keep the first entry.
Extracted<QueryType> parse_query_types(std::string_view reply);

Extracted<std::string> extract_topics_sda(Provider& provider, const ExtractionOptions& options = {});
Extracted<Skill> extract_skills_for_topic_sda(const std::string& topic, Provider& provider,
                                              const ExtractionOptions& options = {});
Extracted<QueryType> extract_query_types_sda(Provider& provider, const ExtractionOptions& options = {});

/// Full SDA run. Per-topic calls run concurrently; assembly is ordered by
/// topic index, so a skill listed under several topics keeps the first.
Extracted<SkillCatalog> build_sda_catalog(Provider& provider, const ExtractionOptions& options = {});

}  // namespace skillmix
