#include <gtest/gtest.h>

#include "skillmix/errors.hpp"
#include "skillmix/generator.hpp"
#include "skillmix/mixer.hpp"
#include "test_support.hpp"

namespace skillmix {
namespace {

using testing::reply;

const char* kFinal =
    "### Instruction:\nHow do I scale a recipe for 12 guests?\n### Response:\nMultiply each quantity by 3.";

SkillTuple pair_tuple(std::size_t index = 0) {
  SkillTuple t;
  t.skills = {"skill_0000", "skill_0001"};
  t.task_index = index;
  return t;
}

std::size_t assistant_count(const ConversationTranscript& t) { return assistant_turns(t.messages); }

TEST(Truncation, HeuristicV1) {
  EXPECT_FALSE(ends_mid_sentence("Done."));
  EXPECT_FALSE(ends_mid_sentence("Really?  \n"));
  EXPECT_FALSE(ends_mid_sentence("```\ncode\n```"));
  EXPECT_FALSE(ends_mid_sentence("He said \xE2\x80\x9Chi.\xE2\x80\x9D"));
  EXPECT_TRUE(ends_mid_sentence("and then the"));
  EXPECT_TRUE(ends_mid_sentence("   "));
  ChatResponse r;
  r.content = "cut off mid";
  EXPECT_TRUE(detect_truncation(r, TruncationPolicy::kFinishReasonOrHeuristic));
  EXPECT_FALSE(detect_truncation(r, TruncationPolicy::kFinishReasonOnly));
  r.content = "Complete.";
  r.finish_reason = FinishReason::kLength;
  EXPECT_TRUE(detect_truncation(r, TruncationPolicy::kFinishReasonOnly));
}

TEST(ParseExample, UsesLastMarkers) {
  const auto [i, r] = parse_example(
      "### Skills: a, b\n### Instruction:\nold\n### Response:\nold answer\n\n"
      "### Instruction:\n  new question?  \n### Response:\n  new answer.\n");
  EXPECT_EQ(i, "new question?");
  EXPECT_EQ(r, "new answer.");
  EXPECT_THROW(parse_example("no markers here"), ParseError);
  EXPECT_THROW(parse_example("### Instruction:\nq only"), ParseError);
  EXPECT_THROW(parse_example("### Instruction:\n\n### Response:\nanswer"), ParseError);
}

TEST(Prompt1, SubstitutesSkillsAndQueryType) {
  const auto sdd = testing::synthetic_catalog(3);
  const auto p = render_prompt1(pair_tuple(), sdd, TemplateLibrary::shipped());
  EXPECT_NE(p.find("skill_0000, skill_0001"), std::string::npos);

  const auto sda = testing::synthetic_catalog(3, 1);
  auto t = pair_tuple();
  EXPECT_THROW(render_prompt1(t, sda, TemplateLibrary::shipped()), PreconditionError);
  t.query_type = "Type-0";
  EXPECT_NE(render_prompt1(t, sda, TemplateLibrary::shipped()).find("Type-0"), std::string::npos);
  EXPECT_THROW(render_prompt1(t, sdd, TemplateLibrary::shipped()), PreconditionError);
  t.skills = {"skill_0000", "missing"};
  t.query_type = std::nullopt;
  EXPECT_THROW(render_prompt1(t, sdd, TemplateLibrary::shipped()), PreconditionError);
}

TEST(Protocol, CleanRunTakesThreeTurns) {
  auto p = make_mock_provider(testing::clean_generation_script());
  const auto c = testing::synthetic_catalog(3);
  const auto r = run_protocol(pair_tuple(7), c, *p, {});
  EXPECT_EQ(assistant_count(r.transcript), 3u);
  EXPECT_EQ(r.transcript.truncation_fix_applied, 0);
  EXPECT_TRUE(r.transcript.critique_applied);
  EXPECT_EQ(r.example.id, "run-000007");
  EXPECT_EQ(r.example.instruction, "How should task 000007 combine both skills?");
  EXPECT_TRUE(r.example.refined);
  EXPECT_EQ(r.example.k, 2u);
  EXPECT_EQ(r.example.teacher, "mock-teacher");
}

TEST(Protocol, TruncatedFirstTurnAddsContinuation) {
  MockScript s;
  s.add("gen:000000", 0, reply("### Instruction:\nQ\n### Response:\nA partial", FinishReason::kLength));
  s.add("gen:000000", 1, reply("### Instruction:\nQ\n### Response:\nA complete answer."));
  s.add("gen:000000", 2, reply("Critique."));
  s.add("gen:000000", 3, reply(kFinal));
  auto p = make_mock_provider(s);
  const auto r = run_protocol(pair_tuple(), testing::synthetic_catalog(3), *p, {});
  EXPECT_EQ(assistant_count(r.transcript), 4u);
  EXPECT_EQ(r.transcript.truncation_fix_applied, 1);
}

TEST(Protocol, TruncatedRefinementAddsFifthTurn) {
  MockScript s;
  s.add("gen:000000", 0, reply("### Instruction:\nQ\n### Response:\nA partial", FinishReason::kLength));
  s.add("gen:000000", 1, reply("### Instruction:\nQ\n### Response:\nDone."));
  s.add("gen:000000", 2, reply("Critique."));
  s.add("gen:000000", 3, reply("### Instruction:\nQ\n### Response:\nA refined but cut"));
  s.add("gen:000000", 4, reply(kFinal));
  auto p = make_mock_provider(s);
  const auto r = run_protocol(pair_tuple(), testing::synthetic_catalog(3), *p, {});
  EXPECT_EQ(assistant_count(r.transcript), 5u);
  EXPECT_EQ(r.transcript.truncation_fix_applied, 2);
  EXPECT_EQ(r.example.response, "Multiply each quantity by 3.");
}

TEST(Protocol, FinishReasonOnlyIgnoresHeuristic) {
  MockScript s;
  s.add("gen:000000", 0, reply("### Instruction:\nQ\n### Response:\nno period"));
  s.add("gen:000000", 1, reply("Critique"));
  s.add("gen:000000", 2, reply("### Instruction:\nQ\n### Response:\nstill no period"));
  auto p = make_mock_provider(s);
  GenerationConfig cfg;
  cfg.truncation_policy = TruncationPolicy::kFinishReasonOnly;
  const auto r = run_protocol(pair_tuple(), testing::synthetic_catalog(3), *p, cfg);
  EXPECT_EQ(assistant_count(r.transcript), 3u);
}

TEST(Protocol, UnrefinedRunStopsAfterFirstTurn) {
  auto p = make_mock_provider(testing::clean_generation_script());
  GenerationConfig cfg;
  cfg.refine = false;
  const auto r = run_protocol(pair_tuple(), testing::synthetic_catalog(3), *p, cfg);
  EXPECT_EQ(assistant_count(r.transcript), 1u);
  EXPECT_FALSE(r.example.refined);
  EXPECT_EQ(r.example.instruction, "Draft question 000000?");
}

TEST(Protocol, ParseReminderRecoversOnce) {
  MockScript s;
  s.add("gen:000000", 0, reply("Draft."));
  s.add("gen:000000", 1, reply("Critique."));
  s.add("gen:000000", 2, reply("Here is my improved pair, without markers."));
  s.add("gen:000000", 3, reply(kFinal));
  auto p = make_mock_provider(s);
  const auto r = run_protocol(pair_tuple(), testing::synthetic_catalog(3), *p, {});
  EXPECT_EQ(r.transcript.parse_retries, 1);
  EXPECT_EQ(assistant_count(r.transcript), 4u);
}

TEST(Protocol, UnparsableAfterRetriesIsAbandoned) {
  MockScript s;
  s.add_fallback("gen:", std::nullopt, reply("Nothing useful."));
  auto p = make_mock_provider(s);
  try {
    run_protocol(pair_tuple(), testing::synthetic_catalog(3), *p, {});
    FAIL() << "expected Abandoned";
  } catch (const AbandonedProtocol& e) {
    EXPECT_EQ(e.transcript().parse_retries, 1);
    EXPECT_EQ(assistant_count(e.transcript()), 4u);
  }
}

TEST(Generate, ContinuesPastAbandonedExamples) {
  auto s = testing::clean_generation_script();
  s.add("gen:000001", 2, reply("No markers at all."));
  s.add("gen:000001", 3, reply("Still none."));
  auto p = make_mock_provider(s);
  const auto c = testing::synthetic_catalog(10);
  const auto tuples = sample_tuples(c, {.n = 4, .k = 2, .seed = 1});
  GenerationConfig cfg;
  cfg.workers = 3;
  const auto run = generate_dataset(tuples, c, *p, cfg);
  EXPECT_EQ(run.examples.size(), 3u);
  EXPECT_EQ(run.transcripts.size(), 4u);
  ASSERT_EQ(run.abandoned.size(), 1u);
  EXPECT_EQ(run.abandoned[0].id, "run-000001");
  EXPECT_EQ(run.examples[1].id, "run-000002");
}

TEST(Generate, OutputIsIndependentOfWorkers) {
  const auto c = testing::synthetic_catalog(30, 3);
  const auto tuples = sample_tuples(c, {.n = 25, .k = 2, .seed = 11});
  auto run_with = [&](std::size_t workers) {
    auto p = make_mock_provider(testing::clean_generation_script());
    GenerationConfig cfg;
    cfg.workers = workers;
    return generate_dataset(tuples, c, *p, cfg);
  };
  const auto a = run_with(1);
  const auto b = run_with(6);
  EXPECT_EQ(a.examples, b.examples);
  EXPECT_EQ(a.transcripts, b.transcripts);
}

TEST(Transcripts, RoundTrip) {
  auto p = make_mock_provider(testing::clean_generation_script());
  const auto r = run_protocol(pair_tuple(3), testing::synthetic_catalog(3), *p, {});
  testing::TempDir dir;
  write_transcripts_jsonl({r.transcript}, dir / "t.jsonl");
  const auto back = read_transcripts_jsonl(dir / "t.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r.transcript);
}

}  // namespace
}  // namespace skillmix
