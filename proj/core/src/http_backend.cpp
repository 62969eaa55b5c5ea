#include "skillmix/http_backend.hpp"

#include <httplib.h>

#include "skillmix/errors.hpp"

namespace skillmix {
namespace wire {
namespace {

nlohmann::json parse_body(std::string_view body) {
  try {
    return nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("provider payload is not JSON: ") + e.what());
  }
}

std::string truncate_for_message(std::string_view body) {
  constexpr std::size_t kMax = 300;
  return body.size() <= kMax ? std::string(body) : std::string(body.substr(0, kMax)) + "...";
}

}  // namespace

nlohmann::json openai_request_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", request.model_id},
          {"messages", std::move(messages)},
          {"temperature", request.temperature},
          {"max_tokens", request.max_output_tokens}};
}

ChatResponse parse_openai_response(std::string_view body) {
  const auto doc = parse_body(body);
  try {
    const auto& choice = doc.at("choices").at(0);
    ChatResponse r;
    const auto& content = choice.at("message").at("content");
    r.content = content.is_null() ? std::string() : content.get<std::string>();
    const std::string finish = choice.value("finish_reason", std::string("stop"));
    r.finish_reason = finish == "length" ? FinishReason::kLength
                      : (finish == "stop" || finish == "eos") ? FinishReason::kStop
                                                              : FinishReason::kError;
    if (doc.contains("usage")) {
      r.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
      r.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("unexpected chat completion payload: ") + e.what());
  }
}

nlohmann::json anthropic_request_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  nlohmann::json body = {{"model", request.model_id},
                         {"max_tokens", request.max_output_tokens},
                         {"temperature", request.temperature}};
  for (const auto& m : request.messages) {
    if (m.role == Role::kSystem) {
      body["system"] = m.content;
      continue;
    }
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  body["messages"] = std::move(messages);
  return body;
}

ChatResponse parse_anthropic_response(std::string_view body) {
  const auto doc = parse_body(body);
  try {
    ChatResponse r;
    for (const auto& block : doc.at("content")) {
      if (block.value("type", std::string()) == "text") r.content += block.at("text").get<std::string>();
    }
    const std::string stop = doc.value("stop_reason", std::string("end_turn"));
    r.finish_reason = stop == "max_tokens" ? FinishReason::kLength
                      : (stop == "end_turn" || stop == "stop_sequence") ? FinishReason::kStop
                                                                        : FinishReason::kError;
    if (doc.contains("usage")) {
      r.prompt_tokens = doc["usage"].value("input_tokens", std::int64_t{0});
      r.completion_tokens = doc["usage"].value("output_tokens", std::int64_t{0});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("unexpected messages payload: ") + e.what());
  }
}

void throw_for_status(int status, std::string_view body) {
  const std::string detail = "HTTP " + std::to_string(status) + ": " + truncate_for_message(body);
  if (status == 401 || status == 403) throw AuthError(detail);
  if (status == 429) throw RateLimited(detail);
  if (status == 408 || status >= 500) throw TransientError(detail);
  throw ProviderError(detail);
}

Endpoint split_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) throw ValidationError("endpoint '" + std::string(url) + "' has no scheme");
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) e.path = std::string(url.substr(path_start));
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

}  // namespace wire

HttpBackend::HttpBackend(ProviderConfig config, std::string credential)
    : config_(std::move(config)), credential_(std::move(credential)), endpoint_(wire::split_endpoint(config_.endpoint)) {}

ChatResponse HttpBackend::send(const ChatRequest& request) {
  httplib::Client client(endpoint_.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  httplib::Headers headers;
  std::string path;
  nlohmann::json body;
  if (config_.dialect == Dialect::kAnthropicCompatible) {
    headers.emplace("x-api-key", credential_);
    headers.emplace("anthropic-version", "2023-06-01");
    path = endpoint_.path + "/messages";
    body = wire::anthropic_request_body(request);
  } else {
    headers.emplace("Authorization", "Bearer " + credential_);
    path = endpoint_.path + "/chat/completions";
    body = wire::openai_request_body(request);
  }

  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result) {
    throw TransientError("request to " + endpoint_.origin + path + " failed: " + httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) wire::throw_for_status(result->status, result->body);
  return config_.dialect == Dialect::kAnthropicCompatible ? wire::parse_anthropic_response(result->body)
                                                          : wire::parse_openai_response(result->body);
}

}  // namespace skillmix
