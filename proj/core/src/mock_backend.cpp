#include "skillmix/mock_backend.hpp"

#include <fstream>

#include "skillmix/errors.hpp"

namespace skillmix {
namespace {

std::int64_t approx_tokens(std::size_t chars) { return static_cast<std::int64_t>((chars + 3) / 4); }

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string trailing_digits(const std::string& s) {
  std::size_t i = s.size();
  while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
  return s.substr(i);
}

MockReply reply_from_json(const nlohmann::json& j) {
  MockReply r;
  r.content = j.at("content").get<std::string>();
  r.finish_reason = finish_reason_from_string(j.value("finish_reason", std::string("stop")));
  if (j.contains("prompt_tokens")) r.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  if (j.contains("completion_tokens")) r.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  if (j.contains("fail_before")) r.fail_before = j.at("fail_before").get<std::vector<std::string>>();
  return r;
}

}  // namespace

MockScript MockScript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("mock script '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

MockScript MockScript::from_json(const nlohmann::json& doc) {
  try {
    if (doc.value("version", 0) != 1) throw SchemaError("mock script version must be 1");
    MockScript script;
    for (const auto& r : doc.value("replies", nlohmann::json::array())) {
      script.add(r.at("task").get<std::string>(), r.at("turn").get<std::size_t>(), reply_from_json(r));
    }
    for (const auto& f : doc.value("fallbacks", nlohmann::json::array())) {
      std::optional<std::size_t> turn;
      if (f.contains("turn")) turn = f.at("turn").get<std::size_t>();
      script.add_fallback(f.at("task_prefix").get<std::string>(), turn, reply_from_json(f));
    }
    return script;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed mock script: ") + e.what());
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("malformed mock script: ") + e.what());
  }
}

MockScript& MockScript::add(std::string task, std::size_t turn, MockReply reply) {
  replies_[{std::move(task), turn}] = std::move(reply);
  return *this;
}

MockScript& MockScript::add_fallback(std::string task_prefix, std::optional<std::size_t> turn, MockReply reply) {
  fallbacks_.push_back({std::move(task_prefix), turn, std::move(reply)});
  return *this;
}

std::optional<MockReply> MockScript::find(const std::string& task, std::size_t turn) const {
  if (auto it = replies_.find({task, turn}); it != replies_.end()) return it->second;

  const Fallback* best = nullptr;
  for (const auto& f : fallbacks_) {
    if (!task.starts_with(f.prefix)) continue;
    if (f.turn && *f.turn != turn) continue;
    if (best == nullptr || f.prefix.size() > best->prefix.size() ||
        (f.prefix.size() == best->prefix.size() && f.turn && !best->turn)) {
      best = &f;
    }
  }
  if (best == nullptr) return std::nullopt;
  MockReply reply = best->reply;
  replace_all(reply.content, "{task}", task);
  replace_all(reply.content, "{turn}", std::to_string(turn));
  replace_all(reply.content, "{index}", trailing_digits(task));
  return reply;
}

ChatResponse MockBackend::send(const ChatRequest& request) {
  const std::size_t turn = assistant_turns(request.messages);
  auto reply = script_.find(request.task_id, turn);
  if (!reply) {
    throw ProviderError("mock script has no reply for task '" + request.task_id + "' turn " + std::to_string(turn));
  }

  std::size_t attempt = 0;
  {
    std::lock_guard lock(mu_);
    attempt = attempts_[{request.task_id, turn}]++;
  }
  if (attempt < reply->fail_before.size()) {
    const std::string& kind = reply->fail_before[attempt];
    if (kind == "rate_limited") throw RateLimited("mock: injected rate limit");
    if (kind == "server_error") throw TransientError("mock: injected server error");
    if (kind == "auth") throw AuthError("mock: injected credential rejection");
    if (kind == "malformed") throw MalformedResponse("mock: injected unparsable payload");
    throw ProviderError("mock: unknown failure kind '" + kind + "'");
  }

  std::size_t prompt_chars = 0;
  for (const auto& m : request.messages) prompt_chars += m.content.size();

  ChatResponse response;
  response.content = reply->content;
  response.finish_reason = reply->finish_reason;
  response.prompt_tokens = reply->prompt_tokens.value_or(approx_tokens(prompt_chars));
  response.completion_tokens = reply->completion_tokens.value_or(approx_tokens(reply->content.size()));
  return response;
}

std::unique_ptr<Provider> make_mock_provider(MockScript script, ProviderConfig config, SleepFn sleep) {
  config.dialect = Dialect::kMock;
  if (config.model_id.empty()) config.model_id = "mock-teacher";
  if (!sleep) sleep = [](std::chrono::milliseconds) {};
  return std::make_unique<Provider>(std::move(config), std::make_unique<MockBackend>(std::move(script)),
                                    std::move(sleep));
}

}  // namespace skillmix
