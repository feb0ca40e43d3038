#include "flowrecon/http_executor.hpp"

#include <cstdlib>
#include <utility>

#include <httplib.h>
#include <json.hpp>

#include "flowrecon/errors.hpp"

namespace flowrecon {

using nlohmann::json;

HttpExecutor::HttpExecutor(HttpConfig config, PrimitiveSpace space)
    : config_(std::move(config)), space_(std::move(space)) {
  if (config_.base_url.empty()) {
    throw ConfigError("http executor needs a base_url");
  }
  resolved_key_ = config_.api_key;
  if (resolved_key_.empty() && !config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      resolved_key_ = key;
    }
  }
}

std::string HttpExecutor::render_system_message(const Primitive& primitive) {
  std::string message = "You are " + primitive.role + ". Follow the " + primitive.pattern +
                        " thought pattern. Available tools: ";
  if (primitive.tools.empty()) {
    message += "none";
  } else {
    for (size_t i = 0; i < primitive.tools.size(); ++i) {
      if (i > 0) {
        message += ", ";
      }
      message += primitive.tools[i];
    }
  }
  message += ".";
  return message;
}

ExecutionResult HttpExecutor::execute(const Workflow& workflow, const std::string& task) const {
  ExecutionResult result;
  std::string carried = task;
  for (int step = 0; step < workflow.length(); ++step) {
    const Primitive* primitive = space_.find(workflow.steps[static_cast<size_t>(step)]);
    if (primitive == nullptr) {
      throw ConfigError("workflow references unknown primitive '" +
                        workflow.steps[static_cast<size_t>(step)] + "'");
    }

    json request;
    request["model"] = primitive->model;
    request["temperature"] = config_.temperature;
    request["messages"] = json::array({
        json{{"role", "system"}, {"content", render_system_message(*primitive)}},
        json{{"role", "user"}, {"content", carried}},
    });

    httplib::Result response;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(config_.timeout_seconds, 0);
      client.set_read_timeout(config_.timeout_seconds, 0);
      if (!resolved_key_.empty()) {
        client.set_bearer_token_auth(resolved_key_);
      }
      response = client.Post(config_.path, request.dump(), "application/json");
      const bool retryable = !response || response->status == 429;
      if (!retryable) {
        break;
      }
    }
    if (!response) {
      throw InfrastructureError("transport failure talking to " + config_.base_url +
                                " (step " + std::to_string(step + 1) + ")");
    }
    if (response->status == 401 || response->status == 403) {
      throw InfrastructureError("authentication rejected by " + config_.base_url +
                                " (status " + std::to_string(response->status) + ")");
    }
    if (response->status < 200 || response->status >= 300) {
      result.failed_at = step + 1;
      result.output.clear();
      return result;
    }

    json body = json::parse(response->body, nullptr, false);
    std::string content;
    if (!body.is_discarded() && body.contains("choices") && body["choices"].is_array() &&
        !body["choices"].empty()) {
      const json& message = body["choices"][0].value("message", json::object());
      content = message.value("content", std::string{});
    }
    if (!body.is_discarded() && body.contains("usage") &&
        body["usage"].contains("total_tokens")) {
      result.tokens += body["usage"]["total_tokens"].get<long long>();
    } else {
      result.tokens += primitive->cost;
    }
    if (content.empty()) {
      result.failed_at = step + 1;
      result.output.clear();
      return result;
    }
    carried = std::move(content);
  }
  result.output = std::move(carried);
  return result;
}

}  // namespace flowrecon
