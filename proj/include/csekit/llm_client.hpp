#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>

#include "csekit/pattern_sim.hpp"

namespace csekit {

struct ChatRequest {
  std::string system;  // rendered prompt
  std::string user;    // sentence the generation is conditioned on
  GenerationKind kind = GenerationKind::kPositive;
  /// Per-call seed; only the mock honors it.
  std::uint64_t seed = 0;
};

/// Chat-completion endpoint. Implementations throw GenerationError once
/// their own retry budget is spent; must be safe to call concurrently.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::string model_id() const = 0;
};

class MockChatClient final : public ChatClient {
 public:
  std::string complete(const ChatRequest& request) override;
  std::string model_id() const override { return "mock"; }
};

struct HttpChatConfig {
  /// OpenAI-compatible chat completions URL.
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-3.5-turbo-0613";
  /// Environment variable holding the bearer token.
  std::string api_key_env = "LLM_API_KEY";
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

/// Provider-agnostic chat-completion client over HTTP(S). Retries transport
/// errors, 429 and 5xx with exponential backoff. The key is read from the
/// environment once and never logged.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpChatConfig config);

  std::string complete(const ChatRequest& request) override;
  std::string model_id() const override { return config_.model; }

  /// Replaces the sleep between retries (tests).
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleeper_ = std::move(sleeper); }

 private:
  HttpChatConfig config_;
  std::string api_key_;
  std::string scheme_host_port_;
  std::string path_;
  std::function<void(std::chrono::milliseconds)> sleeper_;
};

/// Splits "scheme://host[:port]/path" into ("scheme://host[:port]", "/path").
std::pair<std::string, std::string> split_endpoint(const std::string& url);

}  // namespace csekit
