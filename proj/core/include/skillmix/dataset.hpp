#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "skillmix/catalog.hpp"

namespace skillmix {

enum class Corruption { kBrev, kJunk };

std::string_view to_string(Corruption c);
Corruption corruption_from_string(std::string_view s);

/// One (instruction, response) record with its provenance. The transcript
/// that produced it is stored separately under the same id.
struct GeneratedExample {
  std::string id;
  std::string instruction;
  std::string response;
  std::vector<std::string> skills;
  std::optional<std::string> query_type;
  CatalogMode mode = CatalogMode::kSdd;
  std::size_t k = 0;
  std::string teacher;
  bool refined = false;
  std::optional<Corruption> corruption;
  std::string created_at;

  const std::string& transcript_ref() const { return id; }

  friend bool operator==(const GeneratedExample&, const GeneratedExample&) = default;
};

using Dataset = std::vector<GeneratedExample>;

/// Throws ValidationError for empty id/instruction/response, k != |skills|,
/// repeated skills, or an sda record without a query type.
void validate_example(const GeneratedExample& ex);

/// Fixed field order: id, instruction, response, skills, query_type, mode,
/// k, teacher, refined, corruption (only when set), created_at.
nlohmann::ordered_json example_to_json(const GeneratedExample& ex);
/// Throws SchemaError (without a line number) on a missing or mistyped field.
GeneratedExample example_from_json(const nlohmann::json& j);

void write_jsonl(const Dataset& dataset, const std::filesystem::path& path);
/// Throws SchemaError carrying the 1-based line of the first bad record.
Dataset read_jsonl(const std::filesystem::path& path);

struct Tokenizer {
  std::string id;
  std::function<std::size_t(std::string_view)> count;
};

/// Counts maximal runs of non-whitespace bytes. Id "whitespace-v1".
const Tokenizer& whitespace_tokenizer();

struct FieldStats {
  double mean_chars = 0;
  double median_chars = 0;
  std::size_t min_chars = 0;
  std::size_t max_chars = 0;
  std::optional<double> mean_tokens;
};

struct DatasetStats {
  std::size_t count = 0;
  /// Absent for an empty dataset.
  std::optional<FieldStats> instruction;
  std::optional<FieldStats> response;
  std::optional<std::string> tokenizer_id;
};

/// Character lengths are Unicode code points. Token means are present only
/// when a tokenizer is supplied.
DatasetStats compute_stats(const Dataset& dataset, const Tokenizer* tokenizer = nullptr);

nlohmann::ordered_json stats_to_json(const DatasetStats& stats);
std::string stats_table(const DatasetStats& stats);

/// Disjoint seeded parts of the given sizes; each part keeps input order.
/// Throws DomainError when the sizes sum past the dataset size.
std::vector<Dataset> split(const Dataset& dataset, const std::vector<std::size_t>& sizes, std::uint64_t seed);

/// Concatenates the parts in order. Throws ValidationError on a repeated id.
Dataset merge(const std::vector<Dataset>& parts);

}  // namespace skillmix
