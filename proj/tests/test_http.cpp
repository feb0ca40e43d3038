#include "flowrecon/http_executor.hpp"

#include <atomic>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "flowrecon/errors.hpp"

using namespace flowrecon;
using nlohmann::json;

namespace {

// Minimal chat-completions stub. The handler inspects a running request
// counter so tests can fail specific steps or report specific usage.
class StubServer {
 public:
  using Handler = std::function<void(int request_index, const json& body, httplib::Response&)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions",
                 [this](const httplib::Request& request, httplib::Response& response) {
                   const json body = json::parse(request.body, nullptr, false);
                   requests_.push_back(body);
                   auth_headers_.push_back(request.get_header_value("Authorization"));
                   handler_(counter_++, body, response);
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  const std::vector<json>& requests() const { return requests_; }
  const std::vector<std::string>& auth_headers() const { return auth_headers_; }

 private:
  httplib::Server server_;
  Handler handler_;
  std::vector<json> requests_;
  std::vector<std::string> auth_headers_;
  std::atomic<int> counter_{0};
  int port_ = 0;
  std::thread thread_;
};

void reply(httplib::Response& response, const std::string& content, long long usage = -1) {
  json body;
  body["choices"] = json::array({json{{"message", json{{"role", "assistant"},
                                                        {"content", content}}}}});
  if (usage >= 0) {
    body["usage"] = json{{"total_tokens", usage}};
  }
  response.set_content(body.dump(), "application/json");
}

PrimitiveSpace chain_space() {
  return PrimitiveSpace({
      Primitive{"planner", "planner", "model-one", "cot", {"search", "calc"}, 7},
      Primitive{"coder", "coder", "model-two", "direct", {}, 9},
  });
}

HttpConfig config_for(const StubServer& server) {
  HttpConfig config;
  config.base_url = server.base_url();
  config.max_retries = 0;
  config.timeout_seconds = 5;
  return config;
}

}  // namespace

TEST_CASE("a single-step workflow passes the stub reply through") {
  StubServer server([](int, const json&, httplib::Response& response) { reply(response, "OK"); });
  const HttpExecutor executor(config_for(server), chain_space());
  const ExecutionResult result = executor.execute(Workflow{{"coder"}}, "do the thing");
  CHECK_FALSE(result.failed());
  CHECK_EQ(result.output, "OK");
}

TEST_CASE("a 500 at the second step maps to failed_at = 2") {
  StubServer server([](int index, const json&, httplib::Response& response) {
    if (index == 1) {
      response.status = 500;
      return;
    }
    reply(response, "step one text");
  });
  const HttpExecutor executor(config_for(server), chain_space());
  const ExecutionResult result = executor.execute(Workflow{{"planner", "coder"}}, "task");
  REQUIRE(result.failed());
  CHECK_EQ(*result.failed_at, 2);
  CHECK_EQ(result.output, "");
}

TEST_CASE("reported usage is summed across steps") {
  StubServer server([](int index, const json&, httplib::Response& response) {
    reply(response, "text " + std::to_string(index), index == 0 ? 120 : 80);
  });
  const HttpExecutor executor(config_for(server), chain_space());
  const ExecutionResult result = executor.execute(Workflow{{"planner", "coder"}}, "task");
  CHECK_FALSE(result.failed());
  CHECK_EQ(result.tokens, 200);
}

TEST_CASE("missing usage falls back to primitive costs") {
  StubServer server([](int, const json&, httplib::Response& response) { reply(response, "x"); });
  const HttpExecutor executor(config_for(server), chain_space());
  const ExecutionResult result = executor.execute(Workflow{{"planner", "coder"}}, "task");
  CHECK_EQ(result.tokens, 7 + 9);
}

TEST_CASE("each step carries the previous step's output as its user message") {
  StubServer server([](int index, const json&, httplib::Response& response) {
    reply(response, "reply-" + std::to_string(index));
  });
  const HttpExecutor executor(config_for(server), chain_space());
  const ExecutionResult result = executor.execute(Workflow{{"planner", "coder"}}, "the task");
  CHECK_EQ(result.output, "reply-1");
  REQUIRE_EQ(server.requests().size(), 2);
  CHECK_EQ(server.requests()[0]["messages"][1]["content"], "the task");
  CHECK_EQ(server.requests()[1]["messages"][1]["content"], "reply-0");
  CHECK_EQ(server.requests()[0]["model"], "model-one");
  CHECK_EQ(server.requests()[1]["model"], "model-two");
}

TEST_CASE("the system message renders role, pattern, and tools") {
  const PrimitiveSpace space = chain_space();
  CHECK_EQ(HttpExecutor::render_system_message(space.at(0)),
           "You are planner. Follow the cot thought pattern. Available tools: search, calc.");
  CHECK_EQ(HttpExecutor::render_system_message(space.at(1)),
           "You are coder. Follow the direct thought pattern. Available tools: none.");

  StubServer server([](int, const json&, httplib::Response& response) { reply(response, "y"); });
  const HttpExecutor executor(config_for(server), space);
  executor.execute(Workflow{{"planner"}}, "t");
  CHECK_EQ(server.requests()[0]["messages"][0]["content"],
           "You are planner. Follow the cot thought pattern. Available tools: search, calc.");
}

TEST_CASE("an empty completion is an in-band failure") {
  StubServer server([](int, const json&, httplib::Response& response) { reply(response, ""); });
  const HttpExecutor executor(config_for(server), chain_space());
  const ExecutionResult result = executor.execute(Workflow{{"planner"}}, "task");
  REQUIRE(result.failed());
  CHECK_EQ(*result.failed_at, 1);
}

TEST_CASE("authentication rejections raise infrastructure errors") {
  StubServer server([](int, const json&, httplib::Response& response) { response.status = 401; });
  const HttpExecutor executor(config_for(server), chain_space());
  CHECK_THROWS_AS(executor.execute(Workflow{{"planner"}}, "task"), InfrastructureError);
}

TEST_CASE("an unreachable endpoint raises an infrastructure error") {
  HttpConfig config;
  config.base_url = "http://127.0.0.1:1";  // nothing listens there
  config.max_retries = 1;
  config.timeout_seconds = 1;
  const HttpExecutor executor(config, chain_space());
  CHECK_THROWS_AS(executor.execute(Workflow{{"planner"}}, "task"), InfrastructureError);
}

TEST_CASE("the bearer token comes from the configured environment variable") {
  StubServer server([](int, const json&, httplib::Response& response) { reply(response, "z"); });
  ::setenv("FLOWRECON_TEST_KEY", "sk-test-123", 1);
  HttpConfig config = config_for(server);
  config.api_key_env = "FLOWRECON_TEST_KEY";
  const HttpExecutor executor(config, chain_space());
  executor.execute(Workflow{{"coder"}}, "task");
  REQUIRE_EQ(server.auth_headers().size(), 1);
  CHECK_EQ(server.auth_headers()[0], "Bearer sk-test-123");
}
