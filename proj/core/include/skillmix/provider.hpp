#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "skillmix/chat.hpp"
#include "skillmix/money.hpp"

namespace skillmix {

enum class Dialect { kOpenAiCompatible, kAnthropicCompatible, kMock };

std::string_view to_string(Dialect d);
Dialect dialect_from_string(std::string_view s);

struct ProviderConfig {
  Dialect dialect = Dialect::kMock;
  std::string model_id;
  /// Base URL, e.g. "https://api.openai.com/v1". Unused by the mock.
  std::string endpoint;
  /// Name of the environment variable holding the API key.
  std::string credential_env_var;
  PricePer1k price_per_1k_prompt;
  PricePer1k price_per_1k_completion;
  int max_concurrent = 4;
  /// Retries after the first attempt; a call makes at most retry_limit + 1
  /// attempts before RateLimited / TransientError escapes.
  int retry_limit = 3;
  std::chrono::milliseconds backoff_base{500};
  std::chrono::milliseconds backoff_max{30'000};
  std::chrono::seconds timeout{120};
  /// Seeds the per-call jitter streams.
  std::uint64_t retry_seed = 0;
  /// Mock dialect only: path of the reply script.
  std::string mock_script;
};

/// Throws ValidationError on negative prices, max_concurrent < 1, etc.
void validate_config(const ProviderConfig& config);

struct ModelUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t call_count = 0;

  friend bool operator==(const ModelUsage&, const ModelUsage&) = default;
};

/// Per-model token totals. Only successful calls are recorded.
struct UsageLedger {
  std::map<std::string, ModelUsage> per_model;

  void record(const std::string& model_id, std::int64_t prompt_tokens, std::int64_t completion_tokens);
  ModelUsage total() const;

  friend bool operator==(const UsageLedger&, const UsageLedger&) = default;
};

/// Sum over models of prompt/1000 * prompt price + completion/1000 *
/// completion price, in exact fixed point.
Money estimate_cost(const UsageLedger& ledger, const ProviderConfig& config);

/// One transport. Implementations throw RateLimited or TransientError for
/// retryable failures and any other ProviderError for permanent ones.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse send(const ChatRequest& request) = 0;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

/// Thread-safe chat client: validates requests, bounds in-flight calls to
/// max_concurrent, retries retryable failures with seeded exponential
/// backoff, and keeps the usage ledger.
class Provider {
 public:
  Provider(ProviderConfig config, std::unique_ptr<ChatBackend> backend, SleepFn sleep = {});
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  /// Fills request.model_id from the config when empty.
  ChatResponse complete_chat(ChatRequest request);

  const ProviderConfig& config() const { return config_; }
  UsageLedger ledger() const;
  Money cost() const { return estimate_cost(ledger(), config_); }
  /// Transport attempts across all calls, failed ones included.
  std::int64_t total_attempts() const;

  /// Delay before retry number `retry` (0-based) of the call identified by
  /// (task_id, turn). Exposed so the schedule can be tested.
  std::chrono::milliseconds backoff_delay(const std::string& task_id, std::size_t turn, int retry) const;

 private:
  class Slots {
   public:
    explicit Slots(int n) : free_(n) {}
    void acquire();
    void release();

   private:
    std::mutex mu_;
    std::condition_variable cv_;
    int free_;
  };
  struct SlotRelease {
    Slots& slots;
    ~SlotRelease() { slots.release(); }
  };

  ProviderConfig config_;
  std::unique_ptr<ChatBackend> backend_;
  SleepFn sleep_;
  Slots slots_;
  mutable std::mutex ledger_mu_;
  UsageLedger ledger_;
  std::int64_t attempts_ = 0;
};

/// Builds the backend for config.dialect. For HTTP dialects the credential
/// is read from config.credential_env_var; a missing value is an AuthError.
std::unique_ptr<Provider> make_provider(const ProviderConfig& config, SleepFn sleep = {});

}  // namespace skillmix
