#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "lc_oracle.hpp"
#include "skillmix/errors.hpp"
#include "skillmix/judge.hpp"
#include "skillmix/mock_backend.hpp"
#include "test_support.hpp"

namespace skillmix {
namespace {

using testing::fixture;

std::vector<ComparisonItem> fixture_items() {
  std::vector<ComparisonItem> items;
  std::ifstream cand(fixture("judge_candidate.jsonl"));
  std::ifstream base(fixture("judge_baseline.jsonl"));
  for (std::string a, b; std::getline(cand, a) && std::getline(base, b);) {
    const auto ja = nlohmann::json::parse(a);
    const auto jb = nlohmann::json::parse(b);
    items.push_back(make_item(ja["id"], ja["instruction"], ja["output"], jb["output"]));
  }
  return items;
}

std::vector<Verdict> verdicts_from(const std::vector<int>& wins) {
  std::vector<Verdict> v;
  for (std::size_t i = 0; i < wins.size(); ++i) {
    v.push_back({"i" + std::to_string(i), wins[i] ? Preference::kCandidate : Preference::kBaseline, false, "j"});
  }
  return v;
}

struct Synthetic {
  std::vector<int> wins;
  std::vector<double> diffs;
};

// Outcomes drawn from a known logistic model of the length gap.
Synthetic synthetic(std::uint64_t seed, double a, double b, double spread) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gap(spread * 0.3, spread);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Synthetic s;
  for (int i = 0; i < 200; ++i) {
    const double d = std::round(gap(rng));
    const double p = 1.0 / (1.0 + std::exp(-(a + b * d / spread)));
    s.diffs.push_back(d);
    s.wins.push_back(u(rng) < p ? 1 : 0);
  }
  return s;
}

TEST(JudgeParse, AcceptedShapes) {
  EXPECT_EQ(parse_judge_reply("A"), 'A');
  EXPECT_EQ(parse_judge_reply("  **B**\n"), 'B');
  EXPECT_EQ(parse_judge_reply("(A)"), 'A');
  EXPECT_EQ(parse_judge_reply("Output (B) is better."), 'B');
  EXPECT_EQ(parse_judge_reply("Answer: A"), 'A');
  EXPECT_EQ(parse_judge_reply("B. It is more detailed."), 'B');
  EXPECT_THROW(parse_judge_reply("Both are fine."), ParseError);
  EXPECT_THROW(parse_judge_reply("Output (A) and Output (B) tie."), ParseError);
  EXPECT_THROW(parse_judge_reply("Absolutely"), ParseError);
}

TEST(JudgeSwap, LettersAreUnswapped) {
  const auto item = make_item("x", "q?", "cand", "base");
  for (const auto policy : {SwapPolicy::kNever, SwapPolicy::kAlways}) {
    for (const char* letter : {"A", "B"}) {
      MockScript s;
      s.add("judge:x", 0, testing::reply(letter));
      auto p = make_mock_provider(s);
      JudgeOptions opt;
      opt.swap = policy;
      const auto v = judge_pair(item, *p, opt);
      const bool swapped = policy == SwapPolicy::kAlways;
      EXPECT_EQ(v.swapped, swapped);
      const bool candidate_shown_as = (std::string(letter) == "A") != swapped;
      EXPECT_EQ(v.preferred, candidate_shown_as ? Preference::kCandidate : Preference::kBaseline)
          << letter << " swapped=" << swapped;
    }
  }
}

TEST(JudgeSwap, SeededCoinIsFairAndStable) {
  JudgeOptions opt;
  opt.seed = 3;
  int swapped = 0;
  for (int i = 0; i < 4000; ++i) {
    const auto id = "item" + std::to_string(i);
    const bool s = presentation_swapped(id, opt);
    EXPECT_EQ(s, presentation_swapped(id, opt));
    swapped += s;
  }
  EXPECT_NEAR(swapped, 2000, 200);  // about 6.3 standard deviations
}

TEST(JudgeRunTest, FixtureWithReminderTurn) {
  auto p = make_mock_provider(MockScript::load(fixture("mock_judge.json").string()));
  JudgeOptions opt;
  opt.swap = SwapPolicy::kNever;
  const auto items = fixture_items();
  ASSERT_EQ(items.size(), 10u);
  const auto run = judge_all(items, *p, opt);
  ASSERT_EQ(run.verdicts.size(), 10u);
  EXPECT_TRUE(run.unjudged.empty());
  // Letters A B B A A B A B B A once item3's reminder turn is counted.
  EXPECT_DOUBLE_EQ(raw_win_rate(run.verdicts), 50.0);
  EXPECT_EQ(run.verdicts[3].preferred, Preference::kCandidate);
  EXPECT_EQ(p->ledger().total().call_count, 11);
}

TEST(JudgeRunTest, UnparsableItemsAreUnjudged) {
  MockScript s;
  s.add_fallback("judge:", std::nullopt, testing::reply("A"));
  s.add("judge:item2", 0, testing::reply("Hard to say."));
  s.add("judge:item2", 1, testing::reply("Still hard to say."));
  auto p = make_mock_provider(s);
  const auto run = judge_all(fixture_items(), *p);
  EXPECT_EQ(run.verdicts.size(), 9u);
  EXPECT_EQ(run.unjudged, (std::vector<std::string>{"item2"}));
}

TEST(WinRate, RawRate) {
  EXPECT_DOUBLE_EQ(raw_win_rate(verdicts_from({1, 0, 1, 1})), 75.0);
  EXPECT_THROW(raw_win_rate({}), EmptyError);
}

TEST(LengthControl, MatchesBruteForceOracle) {
  const Synthetic sets[] = {synthetic(1, 0.3, 1.2, 400), synthetic(2, -0.8, 0.5, 50), synthetic(3, 0.0, -1.5, 1000)};
  for (const auto& s : sets) {
    const auto fit = fit_length_model(s.wins, s.diffs);
    const auto ref = testing::oracle_fit(s.wins, s.diffs);
    EXPECT_TRUE(fit.converged);
    EXPECT_LE(fit.gradient_norm, kLcGradientTolerance);
    EXPECT_NEAR(lc_win_rate(fit), ref.lc_wr, 1e-4);
    EXPECT_NEAR(fit.theta_len, ref.theta_len, 1e-5);
    const auto cd = testing::oracle_fit_coordinate(s.wins, s.diffs);
    EXPECT_NEAR(lc_win_rate(fit), cd.lc_wr, 1e-4);
  }
}

TEST(LengthControl, EqualLengthsGiveRawRate) {
  const std::vector<int> wins{1, 1, 0, 1, 0, 1, 1, 0, 1, 1, 1, 0};
  const std::vector<double> diffs(wins.size(), 0.0);
  const auto fit = fit_length_model(wins, diffs);
  EXPECT_NEAR(lc_win_rate(fit), raw_win_rate(verdicts_from(wins)), 1e-9);
}

TEST(LengthControl, LongerWinsAreDiscounted) {
  // Candidates are usually longer and the judge likes length, but at equal
  // length the two sides are even: LC WR sits near 50 while raw WR does not.
  const auto s = synthetic(4, 0.0, 2.0, 300);
  const auto fit = fit_length_model(s.wins, s.diffs);
  const double raw = raw_win_rate(verdicts_from(s.wins));
  EXPECT_GT(fit.theta_len, 0.0);
  EXPECT_GT(raw, 55.0);
  EXPECT_LT(std::abs(lc_win_rate(fit) - 50.0), std::abs(raw - 50.0));
}

TEST(LengthControl, DegenerateInputs) {
  EXPECT_THROW(fit_length_model(std::vector<int>{1, 1, 1}, {1.0, 2.0, 3.0}), NonConvergence);
  EXPECT_THROW(fit_length_model(std::vector<int>{1}, {1.0}), PreconditionError);
  EXPECT_THROW(fit_length_model(std::vector<int>{1, 0}, {1.0}), PreconditionError);
}

TEST(Report, AllAgreeFallsBackToRaw) {
  const auto items = fixture_items();
  std::vector<Verdict> v;
  for (const auto& it : items) v.push_back({it.id, Preference::kCandidate, false, "j"});
  const auto r = build_report(v, items);
  EXPECT_DOUBLE_EQ(r.raw_wr, 100.0);
  ASSERT_TRUE(r.lc_wr.has_value());
  EXPECT_DOUBLE_EQ(*r.lc_wr, 100.0);
  EXPECT_FALSE(r.lc_note.empty());
}

TEST(Report, JsonRoundTrip) {
  const auto items = fixture_items();
  std::vector<Verdict> v;
  for (std::size_t i = 0; i < items.size(); ++i) {
    v.push_back({items[i].id, i % 3 == 0 ? Preference::kBaseline : Preference::kCandidate, i % 2 == 1, "j"});
  }
  const auto r = build_report(v, items, 1);
  const auto back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  EXPECT_EQ(back.n, 10u);
  EXPECT_EQ(back.unjudged, 1u);
  EXPECT_DOUBLE_EQ(back.raw_wr, r.raw_wr);
  ASSERT_TRUE(back.lc_wr.has_value());
  EXPECT_NEAR(*back.lc_wr, *r.lc_wr, 1e-9);
  EXPECT_NE(report_table(r).find("LC"), std::string::npos);

  testing::TempDir dir;
  write_verdicts_jsonl(v, dir / "v.jsonl");
  EXPECT_EQ(read_verdicts_jsonl(dir / "v.jsonl"), v);
}

std::vector<EpochScore> published_epochs() {
  const auto doc = nlohmann::json::parse(testing::slurp(fixture("checkpoint_epochs.json")));
  std::vector<EpochScore> out;
  for (const auto& e : doc["epochs"]) {
    out.push_back({e["epoch"].get<int>(), e["lc_wr"].get<double>(), e["raw_wr"].get<double>(),
                   e["validation_loss"].get<double>()});
  }
  return out;
}

TEST(Checkpoint, PicksHighestLcRate) {
  auto epochs = published_epochs();
  EXPECT_EQ(select_checkpoint(epochs), 11);
  EXPECT_EQ(min_loss_epoch(epochs), 2);
  std::reverse(epochs.begin(), epochs.end());
  EXPECT_EQ(select_checkpoint(epochs), 11);
}

TEST(Checkpoint, TiesGoToEarliestEpoch) {
  std::vector<EpochScore> e{{3, 40.0, {}, {}}, {1, 40.0, {}, {}}, {2, 39.0, {}, {}}};
  EXPECT_EQ(select_checkpoint(e), 1);
  EXPECT_THROW(select_checkpoint({}), EmptyError);
  e.push_back({1, 10.0, {}, {}});
  EXPECT_THROW(select_checkpoint(e), ValidationError);
  EXPECT_THROW(min_loss_epoch({{1, 1.0, {}, {}}}), EmptyError);
}

}  // namespace
}  // namespace skillmix
