#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace skillmix {

enum class CatalogMode { kSda, kSdd };

std::string_view to_string(CatalogMode mode);
CatalogMode catalog_mode_from_string(std::string_view s);

struct Skill {
  std::string name;
  CatalogMode source = CatalogMode::kSda;
  std::optional<std::string> topic;

  friend bool operator==(const Skill&, const Skill&) = default;
};

struct QueryType {
  std::string name;
  std::string description;

  friend bool operator==(const QueryType&, const QueryType&) = default;
};

struct SkillCluster {
  std::string name;
  std::vector<std::string> members;
  std::string rationale;

  friend bool operator==(const SkillCluster&, const SkillCluster&) = default;
};

/// Topics, skills and query types from one extraction run. Each list has set
/// semantics (no duplicate names) but keeps insertion order, which fixes the
/// index -> skill mapping the sampler draws from.
class SkillCatalog {
 public:
  static constexpr int kFormatVersion = 1;

  SkillCatalog() = default;
  explicit SkillCatalog(CatalogMode mode) : mode_(mode) {}

  CatalogMode mode() const { return mode_; }
  const std::string& teacher() const { return teacher_; }
  const std::optional<std::string>& created_at() const { return created_at_; }
  void set_provenance(std::string teacher, std::optional<std::string> created_at) {
    teacher_ = std::move(teacher);
    created_at_ = std::move(created_at);
  }

  /// Add* return false (and change nothing) for a name already present.
  /// Names must already be snake_case; anything else is a ValidationError.
  bool add_topic(const std::string& name);
  bool add_skill(Skill skill);
  bool add_query_type(QueryType qt);
  void set_clusters(std::vector<SkillCluster> clusters) { clusters_ = std::move(clusters); }

  const std::vector<std::string>& topics() const { return topics_; }
  const std::vector<Skill>& skills() const { return skills_; }
  const std::vector<QueryType>& query_types() const { return query_types_; }
  const std::vector<SkillCluster>& clusters() const { return clusters_; }

  bool has_skill(std::string_view name) const;
  const Skill* find_skill(std::string_view name) const;
  const QueryType* find_query_type(std::string_view name) const;

  /// Checks every invariant (names, uniqueness, SDA query types, cluster
  /// partition) and throws ValidationError on the first violation.
  void validate() const;

  friend bool operator==(const SkillCatalog& a, const SkillCatalog& b) {
    return a.mode_ == b.mode_ && a.teacher_ == b.teacher_ && a.created_at_ == b.created_at_ &&
           a.topics_ == b.topics_ && a.skills_ == b.skills_ && a.query_types_ == b.query_types_ &&
           a.clusters_ == b.clusters_;
  }

 private:
  CatalogMode mode_ = CatalogMode::kSdd;
  std::string teacher_;
  std::optional<std::string> created_at_;
  std::vector<std::string> topics_;
  std::vector<Skill> skills_;
  std::vector<QueryType> query_types_;
  std::vector<SkillCluster> clusters_;
  std::unordered_map<std::string, std::size_t> skill_index_;
};

nlohmann::ordered_json catalog_to_json(const SkillCatalog& catalog);
/// Throws SchemaError on a version mismatch, a missing field or an invariant
/// violation.
SkillCatalog catalog_from_json(const nlohmann::json& doc);

void save_catalog(const SkillCatalog& catalog, const std::filesystem::path& path);
SkillCatalog load_catalog(const std::filesystem::path& path);

/// Reads a one-name-per-line listing (blank lines ignored).
std::vector<std::string> read_listing(const std::filesystem::path& path);

/// Snake-case-normalizes each entry and drops later duplicates (exact match
/// after normalization). Dropped entries are appended to `dropped`.
std::vector<std::string> dedup_names(const std::vector<std::string>& names, std::vector<std::string>* dropped = nullptr);

}  // namespace skillmix
