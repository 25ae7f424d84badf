#include "csekit/llm_client.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "csekit/error.hpp"

namespace csekit {

std::string MockChatClient::complete(const ChatRequest& request) {
  return mock_generate(request.user, request.kind, request.seed);
}

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("LLM endpoint must look like scheme://host/path: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

HttpChatClient::HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (key == nullptr || *key == '\0')
    throw EnvironmentError("LLM credentials missing: environment variable " + config_.api_key_env + " is not set");
  api_key_ = key;
  std::tie(scheme_host_port_, path_) = split_endpoint(config_.endpoint);
#ifndef CSEKIT_HAVE_OPENSSL
  if (scheme_host_port_.rfind("https://", 0) == 0)
    throw EnvironmentError("this build has no TLS support; use an http:// endpoint");
#endif
  sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string HttpChatClient::complete(const ChatRequest& request) {
  nlohmann::json body = {
      {"model", config_.model},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", request.system}}, {{"role", "user"}, {"content", request.user}}})},
  };
  const std::string payload = body.dump();
  httplib::Headers headers = {{"Authorization", "Bearer " + api_key_}};

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      sleeper_(backoff);
      backoff *= 2;
    }
    httplib::Client client(scheme_host_port_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw GenerationError("LLM request rejected with HTTP " + std::to_string(res->status));
    try {
      auto reply = nlohmann::json::parse(res->body);
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw GenerationError(std::string("malformed chat-completion response: ") + e.what());
    }
  }
  throw GenerationError("LLM request failed after " + std::to_string(config_.max_retries) + " retries (" + last_error + ")");
}

}  // namespace csekit
