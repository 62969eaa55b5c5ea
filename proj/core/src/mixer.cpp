#include "skillmix/mixer.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include "skillmix/errors.hpp"
#include "skillmix/parallel.hpp"
#include "skillmix/rng.hpp"
#include "skillmix/text.hpp"

namespace skillmix {

BigCount combination_count(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw DomainError("C(" + std::to_string(n) + ", " + std::to_string(k) + "): k exceeds N");
  k = std::min(k, n - k);
  BigCount c = 1;
  // Each prefix product is itself a binomial coefficient, so the division is exact.
  for (std::uint64_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void validate_plan(const SamplePlan& plan, std::size_t catalog_size) {
  if (plan.k == 0) throw DomainError("k must be at least 1");
  if (plan.k > catalog_size) {
    throw DomainError("k = " + std::to_string(plan.k) + " exceeds the catalog's " + std::to_string(catalog_size) +
                      " skills");
  }
  if (plan.n == 0) throw DomainError("n must be at least 1");
  if (plan.holdout_count >= plan.n) {
    throw DomainError("holdout_count (" + std::to_string(plan.holdout_count) + ") must be below n (" +
                      std::to_string(plan.n) + ")");
  }
  if (!plan.allow_repeat_tuples) {
    const BigCount space = combination_count(catalog_size, plan.k);
    if (BigCount(plan.n) > space) {
      throw ExhaustedError("n = " + std::to_string(plan.n) + " exceeds the " + space.str() + " distinct " +
                           std::to_string(plan.k) + "-tuples of " + std::to_string(catalog_size) + " skills");
    }
  }
}

namespace {

// Robert Floyd's algorithm: k distinct values from [0, n) in k draws.
std::vector<std::size_t> floyd_sample(RandomStream& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = rng.uniform_below(j + 1);
    if (std::find(picked.begin(), picked.end(), t) == picked.end()) {
      picked.push_back(t);
    } else {
      picked.push_back(j);
    }
  }
  return picked;
}

std::vector<std::string> to_names(const std::vector<Skill>& skills, const std::vector<std::size_t>& idx) {
  std::vector<std::string> names;
  names.reserve(idx.size());
  for (auto i : idx) names.push_back(skills[i].name);
  std::sort(names.begin(), names.end());
  return names;
}

// Lexicographic successor of a k-combination of [0, n); false after the last.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Enumerating beats rejection when the space is small relative to n.
constexpr std::uint64_t kDenseLimit = 2'000'000;

}  // namespace

std::vector<SkillTuple> sample_tuples(const SkillCatalog& catalog, const SamplePlan& plan, std::size_t workers) {
  const auto& skills = catalog.skills();
  validate_plan(plan, skills.size());
  const bool with_query = catalog.mode() == CatalogMode::kSda;
  if (with_query && catalog.query_types().empty()) throw DomainError("sda catalog has no query types to draw from");

  const std::uint64_t skill_seed = derive_seed(plan.seed, "tuple-skills");
  const std::uint64_t query_seed = derive_seed(plan.seed, "tuple-query-type");
  std::vector<SkillTuple> out(plan.n);

  const BigCount space = combination_count(skills.size(), plan.k);
  const bool dense = !plan.allow_repeat_tuples && space <= BigCount(kDenseLimit) && space <= BigCount(4 * plan.n);

  if (dense) {
    // Seeded shuffle of the full enumeration; the first n are the sample.
    std::vector<std::vector<std::size_t>> all;
    std::vector<std::size_t> c(plan.k);
    std::iota(c.begin(), c.end(), std::size_t{0});
    do {
      all.push_back(c);
    } while (next_combination(c, skills.size()));
    RandomStream rng(skill_seed, 0);
    for (std::size_t i = 0; i < plan.n; ++i) {
      std::swap(all[i], all[i + rng.uniform_below(all.size() - i)]);
      out[i].skills = to_names(skills, all[i]);
    }
  } else {
    parallel_for(plan.n, workers, [&](std::size_t i) {
      RandomStream rng(skill_seed, i);
      out[i].skills = to_names(skills, floyd_sample(rng, skills.size(), plan.k));
    });
    if (!plan.allow_repeat_tuples) {
      // Collisions are resolved in task order: a later task that drew an
      // already-taken tuple keeps drawing from its own stream.
      std::unordered_set<std::string> seen;
      seen.reserve(plan.n * 2);
      for (std::size_t i = 0; i < plan.n; ++i) {
        if (seen.insert(join(out[i].skills, "+")).second) continue;
        RandomStream rng(skill_seed, i);
        floyd_sample(rng, skills.size(), plan.k);
        do {
          out[i].skills = to_names(skills, floyd_sample(rng, skills.size(), plan.k));
        } while (!seen.insert(join(out[i].skills, "+")).second);
      }
    }
  }

  for (std::size_t i = 0; i < plan.n; ++i) {
    out[i].task_index = i;
    if (with_query) {
      RandomStream rng(query_seed, i);
      out[i].query_type = catalog.query_types()[rng.uniform_below(catalog.query_types().size())].name;
    }
  }
  return out;
}

std::vector<std::size_t> choose_indices(std::size_t size, std::size_t count, std::uint64_t seed) {
  if (count > size) {
    throw DomainError("cannot choose " + std::to_string(count) + " of " + std::to_string(size) + " elements");
  }
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RandomStream rng(seed, 0);
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.uniform_below(size - i)]);
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::pair<std::vector<SkillTuple>, std::vector<SkillTuple>> split_holdout(const std::vector<SkillTuple>& samples,
                                                                          std::size_t holdout_count,
                                                                          std::uint64_t seed) {
  if (holdout_count >= samples.size() && holdout_count > 0) {
    throw DomainError("holdout_count (" + std::to_string(holdout_count) + ") must be below the sample count (" +
                      std::to_string(samples.size()) + ")");
  }
  const auto chosen = choose_indices(samples.size(), holdout_count, derive_seed(seed, "holdout"));
  std::pair<std::vector<SkillTuple>, std::vector<SkillTuple>> parts;
  std::size_t next = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (next < chosen.size() && chosen[next] == i) {
      parts.second.push_back(samples[i]);
      ++next;
    } else {
      parts.first.push_back(samples[i]);
    }
  }
  return parts;
}

std::string tuple_key(const SkillTuple& t) {
  std::string key = join(t.skills, "+");
  if (t.query_type) key += "|" + *t.query_type;
  return key;
}

nlohmann::ordered_json tuple_to_json(const SkillTuple& t) {
  nlohmann::ordered_json j;
  j["task_index"] = t.task_index;
  j["skills"] = t.skills;
  j["query_type"] = t.query_type ? nlohmann::ordered_json(*t.query_type) : nlohmann::ordered_json(nullptr);
  return j;
}

SkillTuple tuple_from_json(const nlohmann::json& j) {
  SkillTuple t;
  t.task_index = j.at("task_index").get<std::size_t>();
  t.skills = j.at("skills").get<std::vector<std::string>>();
  if (j.contains("query_type") && !j["query_type"].is_null()) t.query_type = j["query_type"].get<std::string>();
  if (t.skills.empty()) throw SchemaError("tuple has no skills");
  return t;
}

void write_tuples_jsonl(const std::vector<SkillTuple>& tuples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write tuples '" + path.string() + "'");
  for (const auto& t : tuples) out << tuple_to_json(t).dump() << '\n';
  if (!out) throw IoError("failed writing tuples '" + path.string() + "'");
}

std::vector<SkillTuple> read_tuples_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open tuples '" + path.string() + "'");
  std::vector<SkillTuple> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(tuple_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(std::string("malformed tuple: ") + e.what(), line_no);
    } catch (const SchemaError& e) {
      throw SchemaError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace skillmix
