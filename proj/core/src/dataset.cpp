#include "skillmix/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "skillmix/errors.hpp"
#include "skillmix/rng.hpp"
#include "skillmix/text.hpp"

namespace skillmix {

std::string_view to_string(Corruption c) { return c == Corruption::kBrev ? "brev" : "junk"; }

Corruption corruption_from_string(std::string_view s) {
  if (s == "brev") return Corruption::kBrev;
  if (s == "junk") return Corruption::kJunk;
  throw ValidationError("unknown corruption '" + std::string(s) + "' (expected brev or junk)");
}

void validate_example(const GeneratedExample& ex) {
  if (trim(ex.id).empty()) throw ValidationError("record has an empty id");
  if (trim(ex.instruction).empty()) throw ValidationError("record '" + ex.id + "' has an empty instruction");
  if (trim(ex.response).empty()) throw ValidationError("record '" + ex.id + "' has an empty response");
  if (ex.skills.empty()) throw ValidationError("record '" + ex.id + "' lists no skills");
  if (ex.k != ex.skills.size()) {
    throw ValidationError("record '" + ex.id + "' has k = " + std::to_string(ex.k) + " but " +
                          std::to_string(ex.skills.size()) + " skills");
  }
  std::unordered_set<std::string> seen;
  for (const auto& s : ex.skills) {
    if (!seen.insert(s).second) throw ValidationError("record '" + ex.id + "' repeats skill '" + s + "'");
  }
  if (ex.mode == CatalogMode::kSda && !ex.query_type) {
    throw ValidationError("sda record '" + ex.id + "' has no query type");
  }
}

nlohmann::ordered_json example_to_json(const GeneratedExample& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["instruction"] = ex.instruction;
  j["response"] = ex.response;
  j["skills"] = ex.skills;
  j["query_type"] = ex.query_type ? nlohmann::ordered_json(*ex.query_type) : nlohmann::ordered_json(nullptr);
  j["mode"] = to_string(ex.mode);
  j["k"] = ex.k;
  j["teacher"] = ex.teacher;
  j["refined"] = ex.refined;
  if (ex.corruption) j["corruption"] = to_string(*ex.corruption);
  j["created_at"] = ex.created_at;
  return j;
}

GeneratedExample example_from_json(const nlohmann::json& j) {
  static constexpr const char* kRequired[] = {"id",   "instruction", "response", "skills",    "query_type",
                                              "mode", "k",           "teacher",  "refined", "created_at"};
  if (!j.is_object()) throw SchemaError("record is not a JSON object");
  for (const char* field : kRequired) {
    if (!j.contains(field)) throw SchemaError(std::string("record is missing \"") + field + "\"");
  }
  try {
    GeneratedExample ex;
    ex.id = j["id"].get<std::string>();
    ex.instruction = j["instruction"].get<std::string>();
    ex.response = j["response"].get<std::string>();
    ex.skills = j["skills"].get<std::vector<std::string>>();
    if (!j["query_type"].is_null()) ex.query_type = j["query_type"].get<std::string>();
    ex.mode = catalog_mode_from_string(j["mode"].get<std::string>());
    ex.k = j["k"].get<std::size_t>();
    ex.teacher = j["teacher"].get<std::string>();
    ex.refined = j["refined"].get<bool>();
    if (j.contains("corruption") && !j["corruption"].is_null()) {
      ex.corruption = corruption_from_string(j["corruption"].get<std::string>());
    }
    ex.created_at = j["created_at"].get<std::string>();
    validate_example(ex);
    return ex;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("record has a mistyped field: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(e.what());
  }
}

void write_jsonl(const Dataset& dataset, const std::filesystem::path& path) {
  for (const auto& ex : dataset) validate_example(ex);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  for (const auto& ex : dataset) out << example_to_json(ex).dump() << '\n';
  if (!out) throw IoError("failed writing dataset '" + path.string() + "'");
}

Dataset read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  Dataset out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("record is not valid JSON: ") + e.what(), line_no);
    }
    try {
      out.push_back(example_from_json(j));
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), line_no);
    }
  }
  return out;
}

const Tokenizer& whitespace_tokenizer() {
  static const Tokenizer tok{"whitespace-v1", [](std::string_view s) {
                               std::size_t n = 0;
                               bool in_word = false;
                               for (unsigned char c : s) {
                                 const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
                                                    c == '\v';
                                 if (!space && !in_word) ++n;
                                 in_word = !space;
                               }
                               return n;
                             }};
  return tok;
}

namespace {

FieldStats field_stats(const Dataset& dataset, const std::string GeneratedExample::*field,
                       const Tokenizer* tokenizer) {
  std::vector<std::size_t> lens;
  lens.reserve(dataset.size());
  std::size_t tokens = 0;
  for (const auto& ex : dataset) {
    lens.push_back(utf8_length(ex.*field));
    if (tokenizer) tokens += tokenizer->count(ex.*field);
  }
  FieldStats fs;
  const double n = static_cast<double>(lens.size());
  fs.mean_chars = static_cast<double>(std::accumulate(lens.begin(), lens.end(), std::size_t{0})) / n;
  std::sort(lens.begin(), lens.end());
  const std::size_t mid = lens.size() / 2;
  fs.median_chars = lens.size() % 2 == 1 ? static_cast<double>(lens[mid])
                                         : (static_cast<double>(lens[mid - 1]) + static_cast<double>(lens[mid])) / 2.0;
  fs.min_chars = lens.front();
  fs.max_chars = lens.back();
  if (tokenizer) fs.mean_tokens = static_cast<double>(tokens) / n;
  return fs;
}

nlohmann::ordered_json field_json(const FieldStats& fs) {
  nlohmann::ordered_json j;
  j["mean_chars"] = fs.mean_chars;
  j["median_chars"] = fs.median_chars;
  j["min_chars"] = fs.min_chars;
  j["max_chars"] = fs.max_chars;
  if (fs.mean_tokens) j["mean_tokens"] = *fs.mean_tokens;
  return j;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

DatasetStats compute_stats(const Dataset& dataset, const Tokenizer* tokenizer) {
  DatasetStats st;
  st.count = dataset.size();
  if (dataset.empty()) return st;
  st.instruction = field_stats(dataset, &GeneratedExample::instruction, tokenizer);
  st.response = field_stats(dataset, &GeneratedExample::response, tokenizer);
  if (tokenizer) st.tokenizer_id = tokenizer->id;
  return st;
}

nlohmann::ordered_json stats_to_json(const DatasetStats& stats) {
  nlohmann::ordered_json j;
  j["count"] = stats.count;
  if (stats.instruction) j["instruction"] = field_json(*stats.instruction);
  if (stats.response) j["response"] = field_json(*stats.response);
  if (stats.tokenizer_id) j["tokenizer"] = *stats.tokenizer_id;
  return j;
}

std::string stats_table(const DatasetStats& stats) {
  std::ostringstream out;
  out << "records: " << stats.count << '\n';
  if (!stats.instruction) return out.str();
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %12s %12s %10s %10s %12s\n", "field", "mean_chars", "median_chars",
                "min_chars", "max_chars", "mean_tokens");
  out << line;
  auto row = [&](const char* name, const FieldStats& fs) {
    std::snprintf(line, sizeof line, "%-12s %12s %12s %10zu %10zu %12s\n", name, fixed2(fs.mean_chars).c_str(),
                  fixed2(fs.median_chars).c_str(), fs.min_chars, fs.max_chars,
                  fs.mean_tokens ? fixed2(*fs.mean_tokens).c_str() : "-");
    out << line;
  };
  row("instruction", *stats.instruction);
  row("response", *stats.response);
  if (stats.tokenizer_id) out << "tokenizer: " << *stats.tokenizer_id << '\n';
  return out.str();
}

std::vector<Dataset> split(const Dataset& dataset, const std::vector<std::size_t>& sizes, std::uint64_t seed) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total > dataset.size()) {
    throw DomainError("split sizes sum to " + std::to_string(total) + " but the dataset has " +
                      std::to_string(dataset.size()) + " records");
  }
  std::vector<std::size_t> perm(dataset.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  RandomStream rng(derive_seed(seed, "split"), 0);
  for (std::size_t i = 0; i < total; ++i) std::swap(perm[i], perm[i + rng.uniform_below(perm.size() - i)]);

  std::vector<Dataset> parts;
  parts.reserve(sizes.size());
  std::size_t offset = 0;
  for (auto size : sizes) {
    std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(offset),
                                 perm.begin() + static_cast<std::ptrdiff_t>(offset + size));
    std::sort(idx.begin(), idx.end());
    Dataset part;
    part.reserve(size);
    for (auto i : idx) part.push_back(dataset[i]);
    parts.push_back(std::move(part));
    offset += size;
  }
  return parts;
}

Dataset merge(const std::vector<Dataset>& parts) {
  Dataset out;
  std::unordered_set<std::string> ids;
  for (const auto& part : parts) {
    for (const auto& ex : part) {
      if (!ids.insert(ex.id).second) throw ValidationError("merge found repeated record id '" + ex.id + "'");
      out.push_back(ex);
    }
  }
  return out;
}

}  // namespace skillmix
