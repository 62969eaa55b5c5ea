#include "skillmix/chat.hpp"

#include <algorithm>

#include "skillmix/errors.hpp"

namespace skillmix {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role role_from_string(std::string_view s) {
  if (s == "system") return Role::kSystem;
  if (s == "user") return Role::kUser;
  if (s == "assistant") return Role::kAssistant;
  throw ValidationError("unknown chat role '" + std::string(s) + "'");
}

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::kStop: return "stop";
    case FinishReason::kLength: return "length";
    case FinishReason::kError: return "error";
  }
  return "error";
}

FinishReason finish_reason_from_string(std::string_view s) {
  if (s == "stop") return FinishReason::kStop;
  if (s == "length") return FinishReason::kLength;
  if (s == "error") return FinishReason::kError;
  throw ValidationError("unknown finish reason '" + std::string(s) + "'");
}

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) throw PreconditionError("chat request has no messages");
  if (!(request.temperature >= 0.0 && request.temperature <= 2.0)) {
    throw PreconditionError("temperature must lie in [0, 2]");
  }
  if (request.max_output_tokens <= 0) throw PreconditionError("max_output_tokens must be positive");

  std::size_t i = 0;
  if (request.messages.front().role == Role::kSystem) ++i;
  Role expected = Role::kUser;
  for (; i < request.messages.size(); ++i) {
    const auto& m = request.messages[i];
    if (m.role != expected) {
      throw PreconditionError("message " + std::to_string(i) + " has role " + std::string(to_string(m.role)) +
                              ", expected " + std::string(to_string(expected)));
    }
    expected = expected == Role::kUser ? Role::kAssistant : Role::kUser;
  }
  for (const auto& m : request.messages) {
    if (m.content.empty()) throw PreconditionError("chat message content is empty");
  }
  if (request.messages.back().role != Role::kUser) {
    throw PreconditionError("the last message of a chat request must come from the user");
  }
}

std::size_t assistant_turns(const std::vector<ChatMessage>& messages) {
  return static_cast<std::size_t>(std::count_if(messages.begin(), messages.end(),
                                                [](const ChatMessage& m) { return m.role == Role::kAssistant; }));
}

}  // namespace skillmix
