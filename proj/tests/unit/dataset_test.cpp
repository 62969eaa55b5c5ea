#include <gtest/gtest.h>

#include <set>

#include "skillmix/dataset.hpp"
#include "skillmix/errors.hpp"
#include "test_support.hpp"

namespace skillmix {
namespace {

using testing::make_record;
using testing::TempDir;

TEST(Dataset, JsonlRoundTripKeepsFieldOrder) {
  auto d = testing::synthetic_dataset(4);
  d[1].corruption = Corruption::kJunk;
  d[2].mode = CatalogMode::kSda;
  d[2].query_type = "Planning";
  d[3].instruction = "Unicode \xE2\x80\x9Cquotes\xE2\x80\x9D and\nnewlines";
  TempDir dir;
  write_jsonl(d, dir / "d.jsonl");
  EXPECT_EQ(read_jsonl(dir / "d.jsonl"), d);

  const auto first_line = testing::slurp(dir / "d.jsonl").substr(0, 40);
  EXPECT_EQ(first_line.rfind("{\"id\":\"run-000000\",\"instruction\":", 0), 0u) << first_line;
  EXPECT_EQ(example_to_json(d[0]).count("corruption"), 0u);
  EXPECT_EQ(example_to_json(d[1])["corruption"], "junk");
}

TEST(Dataset, SchemaErrorNamesTheLine) {
  TempDir dir;
  auto good = example_to_json(make_record(0, "q?", "a.")).dump();
  auto bad = nlohmann::json::parse(good);
  bad.erase("response");
  testing::spit(dir / "d.jsonl", good + "\n" + good + "\n" + bad.dump() + "\n");
  try {
    read_jsonl(dir / "d.jsonl");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Dataset, ValidationRules) {
  auto ex = make_record(0, "q?", "a.");
  EXPECT_NO_THROW(validate_example(ex));
  ex.k = 3;
  EXPECT_THROW(validate_example(ex), ValidationError);
  ex = make_record(0, "q?", "a.");
  ex.skills = {"x", "x"};
  EXPECT_THROW(validate_example(ex), ValidationError);
  ex = make_record(0, "q?", "");
  EXPECT_THROW(validate_example(ex), ValidationError);
  ex = make_record(0, "q?", "a.");
  ex.mode = CatalogMode::kSda;
  EXPECT_THROW(validate_example(ex), ValidationError);
}

TEST(Stats, LengthsAndTokens) {
  Dataset d{make_record(0, "ab", "one two three"), make_record(1, "abcd", "x"),
            make_record(2, "caf\xC3\xA9!", "four five")};
  const auto plain = compute_stats(d);
  EXPECT_EQ(plain.count, 3u);
  EXPECT_DOUBLE_EQ(plain.instruction->mean_chars, (2 + 4 + 5) / 3.0);
  EXPECT_DOUBLE_EQ(plain.instruction->median_chars, 4);
  EXPECT_EQ(plain.instruction->min_chars, 2u);
  EXPECT_EQ(plain.instruction->max_chars, 5u);
  EXPECT_FALSE(plain.response->mean_tokens.has_value());

  const auto tok = compute_stats(d, &whitespace_tokenizer());
  EXPECT_DOUBLE_EQ(*tok.response->mean_tokens, 2.0);
  EXPECT_EQ(tok.tokenizer_id, "whitespace-v1");
  EXPECT_EQ(stats_to_json(tok)["tokenizer"], "whitespace-v1");

  Dataset even{make_record(0, "a", "b"), make_record(1, "abc", "b")};
  EXPECT_DOUBLE_EQ(compute_stats(even).instruction->median_chars, 2.0);
  EXPECT_FALSE(compute_stats({}).instruction.has_value());
}

TEST(Split, DisjointSeededOrdered) {
  const auto d = testing::synthetic_dataset(50);
  const auto parts = split(d, {10, 15}, 3);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].size(), 10u);
  EXPECT_EQ(parts[1].size(), 15u);
  std::set<std::string> ids;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_TRUE(ids.insert(p[i].id).second);
      if (i > 0) {
        EXPECT_LT(p[i - 1].id, p[i].id);
      }
    }
  }
  EXPECT_EQ(parts, split(d, {10, 15}, 3));
  EXPECT_THROW(split(d, {30, 21}, 3), DomainError);
}

TEST(Merge, RejectsDuplicateIds) {
  const auto d = testing::synthetic_dataset(6);
  const auto parts = split(d, {3, 3}, 1);
  EXPECT_EQ(merge(parts).size(), 6u);
  EXPECT_THROW(merge({d, d}), ValidationError);
}

}  // namespace
}  // namespace skillmix
