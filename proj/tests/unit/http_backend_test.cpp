#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "skillmix/errors.hpp"
#include "skillmix/http_backend.hpp"

namespace skillmix {
namespace {

ChatRequest sample_request() {
  ChatRequest r;
  r.model_id = "teacher-1";
  r.messages = {{Role::kSystem, "be brief"}, {Role::kUser, "hello"}};
  r.temperature = 0.5;
  r.max_output_tokens = 64;
  r.task_id = "t";
  return r;
}

TEST(Wire, OpenAiRoundTrip) {
  const auto body = wire::openai_request_body(sample_request());
  EXPECT_EQ(body["model"], "teacher-1");
  EXPECT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["max_tokens"], 64);

  const auto r = wire::parse_openai_response(
      R"({"choices":[{"message":{"role":"assistant","content":"hi"},"finish_reason":"length"}],
          "usage":{"prompt_tokens":12,"completion_tokens":3}})");
  EXPECT_EQ(r.content, "hi");
  EXPECT_EQ(r.finish_reason, FinishReason::kLength);
  EXPECT_EQ(r.prompt_tokens, 12);
  EXPECT_EQ(r.completion_tokens, 3);
  EXPECT_THROW(wire::parse_openai_response("{not json"), MalformedResponse);
  EXPECT_THROW(wire::parse_openai_response(R"({"choices":[]})"), MalformedResponse);
}

TEST(Wire, AnthropicHoistsSystemAndMapsStopReason) {
  const auto body = wire::anthropic_request_body(sample_request());
  EXPECT_EQ(body["system"], "be brief");
  ASSERT_EQ(body["messages"].size(), 1u);
  EXPECT_EQ(body["messages"][0]["role"], "user");

  const auto r = wire::parse_anthropic_response(
      R"({"content":[{"type":"text","text":"a"},{"type":"text","text":"b"}],"stop_reason":"max_tokens",
          "usage":{"input_tokens":5,"output_tokens":2}})");
  EXPECT_EQ(r.content, "ab");
  EXPECT_EQ(r.finish_reason, FinishReason::kLength);
  EXPECT_EQ(r.prompt_tokens, 5);
}

TEST(Wire, StatusTaxonomy) {
  EXPECT_THROW(wire::throw_for_status(401, ""), AuthError);
  EXPECT_THROW(wire::throw_for_status(429, ""), RateLimited);
  EXPECT_THROW(wire::throw_for_status(503, ""), TransientError);
  EXPECT_THROW(wire::throw_for_status(400, ""), ProviderError);
}

TEST(Wire, SplitsEndpoints) {
  const auto e = wire::split_endpoint("https://api.example.com/v1/");
  EXPECT_EQ(e.origin, "https://api.example.com");
  EXPECT_EQ(e.path, "/v1");
  EXPECT_THROW(wire::split_endpoint("api.example.com"), ValidationError);
}

// A local server that answers like an OpenAI-compatible endpoint after
// rejecting the first request with 429.
TEST(HttpBackend, TalksToLocalServerAndRetries) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 429;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json out = {{"choices", {{{"message", {{"content", "echo: " + body["messages"].back()["content"].get<std::string>()}}},
                                        {"finish_reason", "stop"}}}},
                          {"usage", {{"prompt_tokens", 4}, {"completion_tokens", 2}}}};
    res.set_content(out.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ::setenv("SKILLMIX_TEST_HTTP_KEY", "sk-test", 1);
  ProviderConfig cfg;
  cfg.dialect = Dialect::kOpenAiCompatible;
  cfg.model_id = "m";
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.credential_env_var = "SKILLMIX_TEST_HTTP_KEY";
  cfg.backoff_base = std::chrono::milliseconds(1);
  cfg.backoff_max = std::chrono::milliseconds(2);
  cfg.timeout = std::chrono::seconds(5);
  auto provider = make_provider(cfg);
  ChatRequest r;
  r.messages = {{Role::kUser, "ping"}};
  r.task_id = "t";
  const auto out = provider->complete_chat(r);

  server.stop();
  t.join();
  EXPECT_EQ(out.content, "echo: ping");
  EXPECT_EQ(out.attempts, 2);
  EXPECT_EQ(seen_auth, "Bearer sk-test");
  EXPECT_EQ(provider->ledger().total().prompt_tokens, 4);
}

TEST(HttpBackend, RejectedCredentialIsAuthError) {
  httplib::Server server;
  server.Post("/messages", [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderConfig cfg;
  cfg.dialect = Dialect::kAnthropicCompatible;
  cfg.model_id = "m";
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
  cfg.timeout = std::chrono::seconds(5);
  Provider provider(cfg, std::make_unique<HttpBackend>(cfg, "bad"));
  ChatRequest r;
  r.messages = {{Role::kUser, "ping"}};
  EXPECT_THROW(provider.complete_chat(r), AuthError);
  EXPECT_EQ(provider.total_attempts(), 1);
  server.stop();
  t.join();
}

}  // namespace
}  // namespace skillmix
