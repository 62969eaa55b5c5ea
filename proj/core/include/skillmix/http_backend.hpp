#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "skillmix/provider.hpp"

namespace skillmix {

/// Request/response encodings of the two public chat-completion dialects.
/// Kept free of I/O so they can be tested against canned payloads.
namespace wire {

/// POST {endpoint}/chat/completions
nlohmann::json openai_request_body(const ChatRequest& request);
ChatResponse parse_openai_response(std::string_view body);

/// POST {endpoint}/messages; a leading system message moves to "system".
nlohmann::json anthropic_request_body(const ChatRequest& request);
ChatResponse parse_anthropic_response(std::string_view body);

/// Maps a non-2xx HTTP status onto the error taxonomy and throws:
/// 401/403 AuthError, 429 RateLimited, 5xx/408 TransientError, else
/// ProviderError.
[[noreturn]] void throw_for_status(int status, std::string_view body);

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // base path without trailing slash, may be empty
};
Endpoint split_endpoint(std::string_view url);

}  // namespace wire

class HttpBackend : public ChatBackend {
 public:
  HttpBackend(ProviderConfig config, std::string credential);
  ChatResponse send(const ChatRequest& request) override;

 private:
  ProviderConfig config_;
  std::string credential_;
  wire::Endpoint endpoint_;
};

}  // namespace skillmix
