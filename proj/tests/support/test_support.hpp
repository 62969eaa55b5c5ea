#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "skillmix/catalog.hpp"
#include "skillmix/dataset.hpp"
#include "skillmix/mock_backend.hpp"

namespace skillmix::testing {

inline std::filesystem::path fixture_dir() { return SKILLMIX_TEST_FIXTURES; }
inline std::filesystem::path fixture(const std::string& name) { return fixture_dir() / name; }
inline std::filesystem::path catalog_fixture(const std::string& name) {
  return std::filesystem::path(SKILLMIX_TEST_DATA) / "catalogs" / name;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("skillmix-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline MockReply reply(std::string content, FinishReason finish = FinishReason::kStop) {
  MockReply r;
  r.content = std::move(content);
  r.finish_reason = finish;
  return r;
}

/// Clean three-turn generation replies for every "gen:" task.
inline MockScript clean_generation_script() {
  MockScript s;
  s.add_fallback("gen:", 0,
                 reply("### Skills: a, b\n### Instruction:\nDraft question {index}?\n### Response:\nDraft answer "
                       "{index}."));
  s.add_fallback("gen:", 1, reply("Strengths: concrete. Weaknesses: the answer for {index} is thin."));
  s.add_fallback("gen:", 2,
                 reply("### Instruction:\nHow should task {index} combine both skills?\n### Response:\nStep one "
                       "for {index}, then step two, with a worked example."));
  return s;
}

/// Catalog of `n` skills named skill_000, skill_001, ... (sdd unless
/// query types are given).
inline SkillCatalog synthetic_catalog(std::size_t n, std::size_t query_types = 0) {
  SkillCatalog c(query_types > 0 ? CatalogMode::kSda : CatalogMode::kSdd);
  c.set_provenance("synthetic", std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "skill_%04zu", i);
    c.add_skill({buf, c.mode(), std::nullopt});
  }
  for (std::size_t q = 0; q < query_types; ++q) {
    c.add_query_type({"Type-" + std::to_string(q), "Description of type " + std::to_string(q)});
  }
  return c;
}

inline GeneratedExample make_record(std::size_t i, std::string instruction, std::string response) {
  GeneratedExample ex;
  char buf[32];
  std::snprintf(buf, sizeof buf, "run-%06zu", i);
  ex.id = buf;
  ex.instruction = std::move(instruction);
  ex.response = std::move(response);
  ex.skills = {"alpha_skill", "beta_skill"};
  ex.mode = CatalogMode::kSdd;
  ex.k = 2;
  ex.teacher = "mock-teacher";
  ex.refined = true;
  ex.created_at = "1970-01-01T00:00:00Z";
  return ex;
}

/// n records with deterministic, varied text.
inline Dataset synthetic_dataset(std::size_t n) {
  Dataset d;
  d.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.push_back(make_record(i, "Question number " + std::to_string(i) + " about a topic?",
                            "A fairly long original answer to question " + std::to_string(i) +
                                ", with several sentences. It gives an example. It ends here."));
  }
  return d;
}

}  // namespace skillmix::testing
