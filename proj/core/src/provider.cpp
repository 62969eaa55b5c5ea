#include "skillmix/provider.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <thread>

#include "skillmix/errors.hpp"
#include "skillmix/http_backend.hpp"
#include "skillmix/mock_backend.hpp"
#include "skillmix/rng.hpp"

namespace skillmix {

std::string_view to_string(Dialect d) {
  switch (d) {
    case Dialect::kOpenAiCompatible: return "openai_compatible";
    case Dialect::kAnthropicCompatible: return "anthropic_compatible";
    case Dialect::kMock: return "mock";
  }
  return "mock";
}

Dialect dialect_from_string(std::string_view s) {
  if (s == "openai_compatible") return Dialect::kOpenAiCompatible;
  if (s == "anthropic_compatible") return Dialect::kAnthropicCompatible;
  if (s == "mock") return Dialect::kMock;
  throw ValidationError("unknown provider dialect '" + std::string(s) +
                        "' (expected openai_compatible, anthropic_compatible or mock)");
}

void validate_config(const ProviderConfig& config) {
  if (config.price_per_1k_prompt.nanodollars() < 0 || config.price_per_1k_completion.nanodollars() < 0) {
    throw ValidationError("provider prices must be non-negative");
  }
  if (config.max_concurrent < 1) throw ValidationError("max_concurrent must be at least 1");
  if (config.retry_limit < 0) throw ValidationError("retry_limit must be non-negative");
  if (config.backoff_base.count() < 0 || config.backoff_max < config.backoff_base) {
    throw ValidationError("backoff_max must be at least backoff_base, both non-negative");
  }
  if (config.dialect != Dialect::kMock && config.endpoint.empty()) {
    throw ValidationError("provider endpoint is required for dialect " + std::string(to_string(config.dialect)));
  }
  if (config.dialect == Dialect::kMock && config.mock_script.empty()) {
    throw ValidationError("mock provider requires a mock_script path");
  }
}

void UsageLedger::record(const std::string& model_id, std::int64_t prompt_tokens, std::int64_t completion_tokens) {
  auto& u = per_model[model_id];
  u.prompt_tokens += prompt_tokens;
  u.completion_tokens += completion_tokens;
  u.call_count += 1;
}

ModelUsage UsageLedger::total() const {
  ModelUsage t;
  for (const auto& [_, u] : per_model) {
    t.prompt_tokens += u.prompt_tokens;
    t.completion_tokens += u.completion_tokens;
    t.call_count += u.call_count;
  }
  return t;
}

Money estimate_cost(const UsageLedger& ledger, const ProviderConfig& config) {
  Money total;
  for (const auto& [_, u] : ledger.per_model) {
    total += config.price_per_1k_prompt.cost(u.prompt_tokens);
    total += config.price_per_1k_completion.cost(u.completion_tokens);
  }
  return total;
}

void Provider::Slots::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return free_ > 0; });
  --free_;
}

void Provider::Slots::release() {
  {
    std::lock_guard lock(mu_);
    ++free_;
  }
  cv_.notify_one();
}

Provider::Provider(ProviderConfig config, std::unique_ptr<ChatBackend> backend, SleepFn sleep)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      sleep_(sleep ? std::move(sleep) : SleepFn([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(std::max(1, config_.max_concurrent)) {
  if (!backend_) throw PreconditionError("provider needs a backend");
}

std::chrono::milliseconds Provider::backoff_delay(const std::string& task_id, std::size_t turn, int retry) const {
  RandomStream jitter(derive_seed(config_.retry_seed, task_id), turn);
  double u = 0.0;
  for (int i = 0; i <= retry; ++i) u = jitter.uniform01();
  const double base = static_cast<double>(config_.backoff_base.count());
  const double cap = static_cast<double>(config_.backoff_max.count());
  const double exp = std::min(cap, base * static_cast<double>(1ULL << std::min(retry, 30)));
  // Equal jitter: half fixed, half random.
  return std::chrono::milliseconds(static_cast<std::int64_t>(exp * (0.5 + 0.5 * u)));
}

ChatResponse Provider::complete_chat(ChatRequest request) {
  if (request.model_id.empty()) request.model_id = config_.model_id;
  validate_request(request);
  const std::size_t turn = assistant_turns(request.messages);

  for (int attempt = 0;; ++attempt) {
    std::optional<ChatResponse> response;
    {
      slots_.acquire();
      const SlotRelease release{slots_};
      {
        std::lock_guard lock(ledger_mu_);
        ++attempts_;
      }
      try {
        response = backend_->send(request);
      } catch (const RateLimited&) {
        if (attempt >= config_.retry_limit) throw;
      } catch (const TransientError&) {
        if (attempt >= config_.retry_limit) throw;
      }
    }
    if (response) {
      if (response->prompt_tokens < 0 || response->completion_tokens < 0) {
        throw MalformedResponse("provider reported negative token counts");
      }
      response->attempts = attempt + 1;
      std::lock_guard lock(ledger_mu_);
      ledger_.record(request.model_id, response->prompt_tokens, response->completion_tokens);
      return *std::move(response);
    }
    sleep_(backoff_delay(request.task_id, turn, attempt));
  }
}

UsageLedger Provider::ledger() const {
  std::lock_guard lock(ledger_mu_);
  return ledger_;
}

std::int64_t Provider::total_attempts() const {
  std::lock_guard lock(ledger_mu_);
  return attempts_;
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config, SleepFn sleep) {
  validate_config(config);
  std::unique_ptr<ChatBackend> backend;
  if (config.dialect == Dialect::kMock) {
    backend = std::make_unique<MockBackend>(MockScript::load(config.mock_script));
  } else {
    if (config.credential_env_var.empty()) {
      throw AuthError("no credential_env_var configured for " + std::string(to_string(config.dialect)) + " provider");
    }
    const char* key = std::getenv(config.credential_env_var.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("environment variable " + config.credential_env_var + " is not set");
    }
    backend = std::make_unique<HttpBackend>(config, key);
  }
  return std::make_unique<Provider>(config, std::move(backend), std::move(sleep));
}

}  // namespace skillmix
