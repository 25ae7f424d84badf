#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "csekit/error.hpp"
#include "csekit/llm_client.hpp"

// after Eigen: <resolv.h> defines a _res macro
#include <httplib.h>
#include <json.hpp>

using namespace csekit;

namespace {

constexpr const char* kKeyVar = "CSEKIT_TEST_LLM_KEY";
constexpr const char* kSecret = "sk-test-secret-0123456789";

// Local chat-completions stand-in. The first `failures` requests get
// `failure_status`; later ones succeed with an echo of the user message.
class FakeServer {
 public:
  FakeServer(int failures, int failure_status) : failures_(failures), failure_status_(failure_status) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = hits++;
      last_auth = req.get_header_value("Authorization");
      last_body = req.body;
      if (n < failures_) {
        res.status = failure_status_;
        res.set_content("{\"error\": \"nope\"}", "application/json");
        return;
      }
      auto body = nlohmann::json::parse(req.body);
      const std::string user = body["messages"][1]["content"];
      nlohmann::json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "echo: " + user}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }

  std::atomic<int> hits{0};
  std::string last_auth;
  std::string last_body;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  int failures_;
  int failure_status_;
};

HttpChatConfig config_for(const FakeServer& s) {
  HttpChatConfig c;
  c.endpoint = s.endpoint();
  c.api_key_env = kKeyVar;
  c.model = "test-model";
  c.timeout = std::chrono::milliseconds(5000);
  c.max_retries = 3;
  c.initial_backoff = std::chrono::milliseconds(100);
  return c;
}

class LlmClientTest : public ::testing::Test {
 protected:
  void SetUp() override { ::setenv(kKeyVar, kSecret, 1); }
  void TearDown() override { ::unsetenv(kKeyVar); }
};

}  // namespace

TEST(SplitEndpoint, SchemeHostPath) {
  EXPECT_EQ(split_endpoint("https://api.example.com/v1/chat/completions"),
            (std::pair<std::string, std::string>{"https://api.example.com", "/v1/chat/completions"}));
  EXPECT_EQ(split_endpoint("http://localhost:8080").second, "/");
  EXPECT_THROW(split_endpoint("localhost/v1"), ConfigError);
}

TEST_F(LlmClientTest, SendsBearerModelAndBothMessages) {
  FakeServer server(0, 500);
  HttpChatClient client(config_for(server));
  const auto out = client.complete({"system prompt", "user sentence", GenerationKind::kPositive, 0});
  EXPECT_EQ(out, "echo: user sentence");
  EXPECT_EQ(server.last_auth, std::string("Bearer ") + kSecret);
  const auto body = nlohmann::json::parse(server.last_body);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][0]["content"], "system prompt");
}

TEST_F(LlmClientTest, RetriesRateLimitsWithExponentialBackoff) {
  FakeServer server(2, 429);
  HttpChatClient client(config_for(server));
  std::vector<long> waits;
  client.set_sleeper([&](std::chrono::milliseconds d) { waits.push_back(static_cast<long>(d.count())); });
  EXPECT_EQ(client.complete({"s", "u", GenerationKind::kPositive, 0}), "echo: u");
  EXPECT_EQ(server.hits.load(), 3);
  EXPECT_EQ(waits, (std::vector<long>{100, 200}));
}

TEST_F(LlmClientTest, GivesUpAfterBoundedRetries) {
  FakeServer server(100, 503);
  HttpChatClient client(config_for(server));
  client.set_sleeper([](std::chrono::milliseconds) {});
  try {
    client.complete({"s", "u", GenerationKind::kPositive, 0});
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(std::string(e.what()).find(kSecret), std::string::npos);
  }
  EXPECT_EQ(server.hits.load(), 4);
}

TEST_F(LlmClientTest, ClientErrorsAreNotRetried) {
  FakeServer server(100, 401);
  HttpChatClient client(config_for(server));
  client.set_sleeper([](std::chrono::milliseconds) {});
  EXPECT_THROW(client.complete({"s", "u", GenerationKind::kPositive, 0}), GenerationError);
  EXPECT_EQ(server.hits.load(), 1);
}

TEST_F(LlmClientTest, TransportFailureIsGenerationError) {
  HttpChatConfig c;
  c.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  c.api_key_env = kKeyVar;
  c.max_retries = 1;
  c.timeout = std::chrono::milliseconds(500);
  HttpChatClient client(c);
  client.set_sleeper([](std::chrono::milliseconds) {});
  EXPECT_THROW(client.complete({"s", "u", GenerationKind::kPositive, 0}), GenerationError);
}

TEST(LlmClientEnv, MissingKeyIsEnvironmentErrorNamingTheVariable) {
  ::unsetenv(kKeyVar);
  HttpChatConfig c;
  c.api_key_env = kKeyVar;
  try {
    HttpChatClient client(c);
    FAIL();
  } catch (const EnvironmentError& e) {
    EXPECT_NE(std::string(e.what()).find(kKeyVar), std::string::npos);
  }
}

TEST(MockClient, DelegatesToMockGenerate) {
  MockChatClient mock;
  EXPECT_EQ(mock.complete({"ignored", "a b c d", GenerationKind::kIntermediate, 5}), "a b c");
  EXPECT_EQ(mock.model_id(), "mock");
}
