#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "skillmix/provider.hpp"

namespace skillmix {

/// One canned reply. Replays are position based: a reply is keyed by the
/// request's task id and its turn index (the number of assistant messages
/// already in the conversation), never by prompt wording.
struct MockReply {
  std::string content;
  FinishReason finish_reason = FinishReason::kStop;
  /// When absent, ceil(chars / 4) of the prompt or reply text.
  std::optional<std::int64_t> prompt_tokens;
  std::optional<std::int64_t> completion_tokens;
  /// Failures injected before the reply is served, one per attempt:
  /// "rate_limited", "server_error", "auth" or "malformed".
  std::vector<std::string> fail_before;
};

/// Reply script read from a JSON fixture:
///
///   {"version": 1,
///    "replies":   [{"task": "gen:000000", "turn": 0, "content": "...", ...}],
///    "fallbacks": [{"task_prefix": "gen:", "turn": 2, "content": "..."}]}
///
/// Exact replies win over fallbacks; among fallbacks the longest matching
/// prefix wins and an entry with a turn beats one without. Fallback content
/// may use {task}, {turn} and {index} (the trailing digits of the task id).
class MockScript {
 public:
  static MockScript load(const std::string& path);
  static MockScript from_json(const nlohmann::json& doc);

  MockScript& add(std::string task, std::size_t turn, MockReply reply);
  MockScript& add_fallback(std::string task_prefix, std::optional<std::size_t> turn, MockReply reply);

  /// The reply for (task, turn) with fallback placeholders substituted.
  std::optional<MockReply> find(const std::string& task, std::size_t turn) const;

 private:
  struct Fallback {
    std::string prefix;
    std::optional<std::size_t> turn;
    MockReply reply;
  };
  std::map<std::pair<std::string, std::size_t>, MockReply> replies_;
  std::vector<Fallback> fallbacks_;
};

/// Deterministic offline backend: a pure function of (script, task id, turn
/// index, attempt number). Requests with no scripted reply fail with
/// ProviderError.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(MockScript script) : script_(std::move(script)) {}
  ChatResponse send(const ChatRequest& request) override;

 private:
  MockScript script_;
  std::mutex mu_;
  std::map<std::pair<std::string, std::size_t>, std::size_t> attempts_;
};

/// Convenience for tests and tools: a Provider over an in-memory script.
std::unique_ptr<Provider> make_mock_provider(MockScript script, ProviderConfig config = {}, SleepFn sleep = {});

}  // namespace skillmix
