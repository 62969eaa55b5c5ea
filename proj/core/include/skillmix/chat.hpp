#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skillmix {

enum class Role { kSystem, kUser, kAssistant };
enum class FinishReason { kStop, kLength, kError };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);
std::string_view to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view s);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  int max_output_tokens = 4096;
  /// Identifies the logical task (e.g. "gen:000017") the call belongs to.
  /// Used for logging, retry jitter streams, and mock replay.
  std::string task_id;
};

struct ChatResponse {
  std::string content;
  FinishReason finish_reason = FinishReason::kStop;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  /// Transport attempts spent on this call, including the successful one.
  int attempts = 1;
};

/// Throws PreconditionError unless the request is well formed: non-empty
/// messages with non-empty content, user/assistant alternation after an
/// optional leading system message, a final user turn, temperature in
/// [0, 2] and a positive token limit.
void validate_request(const ChatRequest& request);

/// Number of assistant turns already present; the turn index of the reply.
std::size_t assistant_turns(const std::vector<ChatMessage>& messages);

}  // namespace skillmix
