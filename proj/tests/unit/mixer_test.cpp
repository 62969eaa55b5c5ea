#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>

#include "skillmix/catalog.hpp"
#include "skillmix/errors.hpp"
#include "skillmix/mixer.hpp"
#include "test_support.hpp"

namespace skillmix {
namespace {

using testing::synthetic_catalog;

// Stream oracle written out from the documented construction rather than
// calling into the library: SplitMix64 finalizer, FNV-1a keyed purposes,
// mt19937_64 seeded with mix(seed) ^ index, rejection sampling for ranges.
namespace oracle {

std::uint64_t splitmix_final(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

std::uint64_t purpose_seed(std::uint64_t seed, const std::string& purpose) {
  return splitmix_final(seed ^ splitmix_final(fnv(purpose)));
}

std::uint64_t below(std::mt19937_64& e, std::uint64_t bound) {
  // Reject the top 2^64 mod bound values.
  const std::uint64_t excess = (UINT64_MAX % bound + 1) % bound;
  for (;;) {
    const std::uint64_t x = e();
    if (x <= UINT64_MAX - excess) return x % bound;
  }
}

}  // namespace oracle

TEST(Mixer, CombinationCounts) {
  EXPECT_EQ(combination_count(5, 2), 10);
  EXPECT_EQ(combination_count(500, 2), 124750);
  EXPECT_EQ(combination_count(7, 0), 1);
  EXPECT_EQ(combination_count(1132, 5).str(), "15353566373496");
  EXPECT_EQ(combination_count(200, 100).str(), "90548514656103281165404177077484163874504589675413336841320");
  EXPECT_THROW(combination_count(3, 4), DomainError);
}

TEST(Mixer, EngineIsTheStandardOne) {
  std::mt19937_64 e;
  e.discard(9999);
  EXPECT_EQ(e(), 9981545732273789042ULL);
}

TEST(Mixer, PlanValidation) {
  const auto c = synthetic_catalog(5);
  EXPECT_THROW(sample_tuples(c, {.n = 3, .k = 0}), DomainError);
  EXPECT_THROW(sample_tuples(c, {.n = 3, .k = 6}), DomainError);
  EXPECT_THROW(sample_tuples(c, {.n = 0, .k = 2}), DomainError);
  EXPECT_THROW(sample_tuples(c, {.n = 11, .k = 2}), ExhaustedError);
  EXPECT_THROW(sample_tuples(c, {.n = 4, .k = 2, .holdout_count = 4}), DomainError);
  EXPECT_NO_THROW(sample_tuples(c, {.n = 11, .k = 2, .allow_repeat_tuples = true}));
}

TEST(Mixer, ExhaustsEveryPairOfFive) {
  const auto c = synthetic_catalog(5);
  const auto t = sample_tuples(c, {.n = 10, .k = 2, .seed = 3});
  std::set<std::string> keys;
  for (const auto& x : t) {
    ASSERT_EQ(x.skills.size(), 2u);
    EXPECT_LT(x.skills[0], x.skills[1]);
    EXPECT_FALSE(x.query_type.has_value());
    keys.insert(tuple_key(x));
  }
  EXPECT_EQ(keys.size(), 10u);
}

TEST(Mixer, DistinctOnSparsePath) {
  const auto c = synthetic_catalog(60);
  const auto t = sample_tuples(c, {.n = 1500, .k = 2, .seed = 9});  // C = 1770
  std::set<std::string> keys;
  for (const auto& x : t) keys.insert(tuple_key(x));
  EXPECT_EQ(keys.size(), 1500u);
}

TEST(Mixer, DeterministicAndWorkerIndependent) {
  const auto c = synthetic_catalog(300, 4);
  const SamplePlan plan{.n = 2000, .k = 3, .seed = 42};
  const auto a = sample_tuples(c, plan, 1);
  EXPECT_EQ(a, sample_tuples(c, plan, 8));
  EXPECT_EQ(a, sample_tuples(c, plan, 1));
  auto other = plan;
  other.seed = 43;
  EXPECT_NE(a, sample_tuples(c, other, 1));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].task_index, i);
    ASSERT_TRUE(a[i].query_type.has_value());
  }
}

TEST(Mixer, GoldenSingleSkillDraws) {
  const auto c = load_catalog(testing::catalog_fixture("sda_gpt4_turbo.json"));
  const auto t = sample_tuples(c, {.n = 3, .k = 1, .seed = 7});
  const auto skill_seed = oracle::purpose_seed(7, "tuple-skills");
  const auto query_seed = oracle::purpose_seed(7, "tuple-query-type");
  for (std::uint64_t i = 0; i < 3; ++i) {
    std::mt19937_64 skill_engine(oracle::splitmix_final(skill_seed) ^ i);
    const auto s = oracle::below(skill_engine, c.skills().size());
    std::mt19937_64 query_engine(oracle::splitmix_final(query_seed) ^ i);
    const auto q = oracle::below(query_engine, c.query_types().size());
    EXPECT_EQ(t[i].skills, (std::vector<std::string>{c.skills()[s].name})) << i;
    EXPECT_EQ(t[i].query_type, c.query_types()[q].name) << i;
  }
}

TEST(Mixer, PairsAreRoughlyUniform) {
  // 30000 draws with repeats over the 10 pairs of 5 skills; chi-square with
  // 9 degrees of freedom stays below 27.88 (p = 0.001).
  const auto c = synthetic_catalog(5);
  const auto t = sample_tuples(c, {.n = 30000, .k = 2, .seed = 5, .allow_repeat_tuples = true});
  std::map<std::string, int> counts;
  for (const auto& x : t) ++counts[tuple_key(x)];
  ASSERT_EQ(counts.size(), 10u);
  double chi2 = 0;
  for (const auto& [k, n] : counts) chi2 += (n - 3000.0) * (n - 3000.0) / 3000.0;
  EXPECT_LT(chi2, 27.88);
}

TEST(Mixer, HoldoutIsDisjointAndOrdered) {
  const auto c = synthetic_catalog(40);
  const auto t = sample_tuples(c, {.n = 100, .k = 2, .seed = 1});
  const auto [train, held] = split_holdout(t, 20, 1);
  EXPECT_EQ(train.size(), 80u);
  EXPECT_EQ(held.size(), 20u);
  std::set<std::size_t> ids;
  for (const auto& x : train) ids.insert(x.task_index);
  for (const auto& x : held) EXPECT_TRUE(ids.insert(x.task_index).second);
  EXPECT_TRUE(std::is_sorted(held.begin(), held.end(),
                             [](const auto& a, const auto& b) { return a.task_index < b.task_index; }));
  EXPECT_EQ(held, split_holdout(t, 20, 1).second);
  EXPECT_TRUE(split_holdout(t, 0, 1).second.empty());
}

TEST(Mixer, ChooseIndices) {
  const auto idx = choose_indices(100, 10, 4);
  EXPECT_EQ(idx.size(), 10u);
  EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 10u);
  EXPECT_THROW(choose_indices(3, 4, 0), DomainError);
}

TEST(Mixer, TuplesRoundTripThroughJsonl) {
  const auto c = synthetic_catalog(20, 2);
  const auto t = sample_tuples(c, {.n = 15, .k = 3, .seed = 2});
  testing::TempDir dir;
  write_tuples_jsonl(t, dir / "t.jsonl");
  EXPECT_EQ(read_tuples_jsonl(dir / "t.jsonl"), t);
}

}  // namespace
}  // namespace skillmix
