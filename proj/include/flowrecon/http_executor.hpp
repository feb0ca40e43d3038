#pragma once

#include <string>

#include "flowrecon/execution.hpp"
#include "flowrecon/primitives.hpp"

namespace flowrecon {

/// Connection settings for a chat-completions-compatible backend.
struct HttpConfig {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string api_key_env;  // environment variable to read the key from
  double temperature = 0.0;
  int max_retries = 2;  // extra attempts on transport errors and 429
  int timeout_seconds = 60;
};

/// Runs a workflow as a sequential chat chain: step i sends the rendered
/// system message for its primitive plus the task (first step) or the
/// previous step's text (later steps) as the user message. The final text is
/// the workflow output.
///
/// Token accounting prefers the backend's usage.total_tokens and falls back
/// to the primitive's cost when usage is omitted. A non-success response or
/// an empty completion at step j yields failed_at = j (1-based, counting the
/// failing step as invoked). Transport and authentication problems raise
/// InfrastructureError instead.
class HttpExecutor : public Executor {
 public:
  HttpExecutor(HttpConfig config, PrimitiveSpace space);

  ExecutionResult execute(const Workflow& workflow, const std::string& task) const override;

  /// The documented system-prompt template:
  /// "You are <role>. Follow the <pattern> thought pattern. Available
  /// tools: <t1, t2 | none>."
  static std::string render_system_message(const Primitive& primitive);

 private:
  HttpConfig config_;
  PrimitiveSpace space_;
  std::string resolved_key_;
};

}  // namespace flowrecon
