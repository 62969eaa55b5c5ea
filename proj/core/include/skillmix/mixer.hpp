#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include "skillmix/catalog.hpp"

namespace skillmix {

using BigCount = boost::multiprecision::cpp_int;

/// Exact C(N, k). Throws DomainError when k > N.
BigCount combination_count(std::uint64_t n, std::uint64_t k);

struct SkillTuple {
  /// k distinct skill names in lexicographic order, so (a, b) and (b, a)
  /// are the same tuple.
  std::vector<std::string> skills;
  std::optional<std::string> query_type;
  std::size_t task_index = 0;

  friend bool operator==(const SkillTuple&, const SkillTuple&) = default;
};

struct SamplePlan {
  std::size_t n = 0;
  std::size_t k = 2;
  std::uint64_t seed = 0;
  bool allow_repeat_tuples = false;
  std::size_t holdout_count = 0;
};

/// Throws DomainError for k outside [1, N], n = 0 or holdout_count >= n,
/// and ExhaustedError when n distinct tuples do not exist.
void validate_plan(const SamplePlan& plan, std::size_t catalog_size);

/// Draws plan.n tuples. Task i draws from its own stream, so the output is
/// a pure function of (catalog, plan) whatever the worker count. Query
/// types are drawn (uniformly, per task) only for sda catalogs.
std::vector<SkillTuple> sample_tuples(const SkillCatalog& catalog, const SamplePlan& plan, std::size_t workers = 1);

/// Seeded disjoint split. Both parts keep the input order.
std::pair<std::vector<SkillTuple>, std::vector<SkillTuple>> split_holdout(const std::vector<SkillTuple>& samples,
                                                                          std::size_t holdout_count,
                                                                          std::uint64_t seed);

/// Indices of `count` distinct elements of [0, size), chosen uniformly under
/// `seed` and returned ascending. Shared by every seeded subset selection.
std::vector<std::size_t> choose_indices(std::size_t size, std::size_t count, std::uint64_t seed);

/// Joins the skills with '+' (and the query type after '|'); equal keys
/// mean equal tuples.
std::string tuple_key(const SkillTuple& t);

nlohmann::ordered_json tuple_to_json(const SkillTuple& t);
SkillTuple tuple_from_json(const nlohmann::json& j);
void write_tuples_jsonl(const std::vector<SkillTuple>& tuples, const std::filesystem::path& path);
std::vector<SkillTuple> read_tuples_jsonl(const std::filesystem::path& path);

}  // namespace skillmix
