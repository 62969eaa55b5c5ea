#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skillmix/catalog.hpp"
#include "skillmix/dataset.hpp"
#include "skillmix/errors.hpp"
#include "skillmix/mixer.hpp"
#include "skillmix/provider.hpp"
#include "skillmix/templates.hpp"

namespace skillmix {

enum class TruncationPolicy { kFinishReasonOnly, kFinishReasonOrHeuristic };

std::string_view to_string(TruncationPolicy p);
TruncationPolicy truncation_policy_from_string(std::string_view s);

struct GenerationConfig {
  double temperature = 1.0;
  int max_output_tokens = 4096;
  /// Extra "restate in the marker format" turns before giving up.
  int max_parse_retries = 1;
  TruncationPolicy truncation_policy = TruncationPolicy::kFinishReasonOrHeuristic;
  /// Runs the critique and refine turns. Off gives unrefined examples.
  bool refine = true;
  std::string run_id = "run";
  /// Stamped into every record; pinned so reruns are byte-identical.
  std::string created_at = "1970-01-01T00:00:00Z";
  std::size_t workers = 4;
  /// Defaults to TemplateLibrary::shipped().
  const TemplateLibrary* templates = nullptr;
};

/// Record id for a task: "<run_id>-<task_index, 6 digits>".
std::string example_id(const std::string& run_id, std::size_t task_index);
/// Provider task id for a generation conversation: "gen:<6 digits>".
std::string generation_task_id(std::size_t task_index);

struct TurnUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  FinishReason finish_reason = FinishReason::kStop;
  int attempts = 1;

  friend bool operator==(const TurnUsage&, const TurnUsage&) = default;
};

struct ConversationTranscript {
  std::string example_id;
  std::size_t task_index = 0;
  std::vector<ChatMessage> messages;
  /// One entry per assistant turn, aligned with those turns.
  std::vector<TurnUsage> usage;
  int truncation_fix_applied = 0;
  bool critique_applied = false;
  int parse_retries = 0;

  friend bool operator==(const ConversationTranscript&, const ConversationTranscript&) = default;
};

nlohmann::ordered_json transcript_to_json(const ConversationTranscript& t);
ConversationTranscript transcript_from_json(const nlohmann::json& j);
void write_transcripts_jsonl(const std::vector<ConversationTranscript>& transcripts,
                             const std::filesystem::path& path);
std::vector<ConversationTranscript> read_transcripts_jsonl(const std::filesystem::path& path);

/// Prompt 1 for the catalog's mode. The skills must exist in the catalog;
/// sda tuples must carry a query type known to it.
std::string render_prompt1(const SkillTuple& tuple, const SkillCatalog& catalog, const TemplateLibrary& templates);

/// Heuristic v1: the trimmed text is empty or does not end in terminal
/// punctuation (. ! ? : and closing quotes, brackets, backticks, asterisks).
bool ends_mid_sentence(std::string_view text);
bool detect_truncation(const ChatResponse& response, TruncationPolicy policy);

/// Splits a final turn at the last "### Instruction:" and the last
/// "### Response:" after it. Anything before the instruction marker (a
/// "### Skills:" header, say) is ignored.
std::pair<std::string, std::string> parse_example(std::string_view final_text);

/// Abandoned, with the conversation that failed to parse.
class AbandonedProtocol : public Abandoned {
 public:
  AbandonedProtocol(const std::string& what, ConversationTranscript transcript)
      : Abandoned(what), transcript_(std::move(transcript)) {}
  const ConversationTranscript& transcript() const noexcept { return transcript_; }

 private:
  ConversationTranscript transcript_;
};

struct ProtocolResult {
  GeneratedExample example;
  ConversationTranscript transcript;
};

/// P1; P2 if P1 was truncated; P3 critique; P4 refine; P5 if the refined
/// reply was truncated; then the last assistant turn is parsed, with up to
/// max_parse_retries restatement turns. Throws AbandonedProtocol when
/// parsing still fails; ProviderError propagates.
ProtocolResult run_protocol(const SkillTuple& tuple, const SkillCatalog& catalog, Provider& provider,
                            const GenerationConfig& config);

struct AbandonedExample {
  std::size_t task_index = 0;
  std::string id;
  std::string reason;
};

struct GenerationRun {
  Dataset examples;
  /// Transcripts of emitted and abandoned examples alike.
  std::vector<ConversationTranscript> transcripts;
  std::vector<AbandonedExample> abandoned;
};

/// Runs the protocol for every tuple on config.workers threads. Outputs are
/// ordered by input position, so they never depend on scheduling.
GenerationRun generate_dataset(const std::vector<SkillTuple>& tuples, const SkillCatalog& catalog, Provider& provider,
                               const GenerationConfig& config);

}  // namespace skillmix
