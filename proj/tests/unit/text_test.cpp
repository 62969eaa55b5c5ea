#include <gtest/gtest.h>

#include "skillmix/errors.hpp"
#include "skillmix/rng.hpp"
#include "skillmix/templates.hpp"
#include "skillmix/text.hpp"

namespace skillmix {
namespace {

TEST(Text, SnakeCase) {
  EXPECT_TRUE(is_snake_case("critical_thinking"));
  EXPECT_TRUE(is_snake_case("web3_basics"));
  EXPECT_FALSE(is_snake_case("Critical Thinking"));
  EXPECT_FALSE(is_snake_case("double__underscore"));
  EXPECT_FALSE(is_snake_case("_leading"));
  EXPECT_FALSE(is_snake_case(""));
  EXPECT_EQ(normalize_snake_case("Information Technology (IT)"), "information_technology_it");
  EXPECT_EQ(normalize_snake_case("  --Web-Development--"), "web_development");
}

TEST(Text, Utf8LengthCountsCodePoints) {
  EXPECT_EQ(utf8_length("abc"), 3u);
  EXPECT_EQ(utf8_length("caf\xC3\xA9"), 4u);
  EXPECT_EQ(utf8_length("\xE2\x80\x9Cq\xE2\x80\x9D"), 3u);
}

TEST(Text, StripsListDecoration) {
  EXPECT_EQ(strip_list_decoration("1. cooking"), "cooking");
  EXPECT_EQ(strip_list_decoration("  - **knife_technique**"), "knife_technique");
  EXPECT_EQ(strip_list_decoration("3) `food_safety`"), "food_safety");
}

TEST(Templates, RendersInOnePass) {
  EXPECT_EQ(render_template("a {x} b", {{"x", "{y}"}, {"y", "no"}}), "a {y} b");
  EXPECT_THROW(render_template("{missing}", {}), TemplateError);
  // JSON-looking braces are not placeholders.
  EXPECT_EQ(render_template("{\"k\": 1}", {}), "{\"k\": 1}");
}

TEST(Templates, ShippedLibraryHasEveryPrompt) {
  const auto& lib = TemplateLibrary::shipped();
  for (const char* name : {"sdd_label", "sdd_cluster", "sda_topics", "sda_skills", "sda_query_types",
                           "sdd_generate_p1", "sda_generate_p1", "generate_p2", "generate_p3", "generate_p4",
                           "generate_p5", "inject_brev", "inject_junk", "judge_pairwise"}) {
    EXPECT_TRUE(lib.contains(name)) << name;
  }
  EXPECT_EQ(lib.latest_version("generate_p3"), 1);
}

TEST(Templates, LatestVersionWins) {
  TemplateLibrary lib;
  lib.put("t", 1, "one");
  lib.put("t", 2, "two {x}");
  EXPECT_EQ(lib.render("t", {{"x", "!"}}), "two !");
  EXPECT_EQ(lib.get("t", 1), "one");
  EXPECT_THROW(lib.get("absent"), TemplateError);
}

TEST(Rng, StreamsAreIndependentOfOrder) {
  RandomStream a(42, 7);
  RandomStream b(42, 7);
  RandomStream c(42, 8);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
  EXPECT_EQ(derive_seed(1, "a"), derive_seed(1, "a"));
}

}  // namespace
}  // namespace skillmix
