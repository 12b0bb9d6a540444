#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "abstain/net/http_client.h"

namespace abstain {

struct ChatRequest {
  std::string prompt;  // sent as the single user message
  double temperature = 0.0;
  int max_tokens = 128;
  std::optional<std::int64_t> seed;
};

class ChatClient {
 public:
  virtual ~ChatClient() = default;
  /// Returns the assistant message text. Throws BackendError on failure.
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual const std::string& model_id() const = 0;
};

/// Chat-completion style API: POST {base_url}/chat/completions with
/// {"model","messages":[{"role":"user","content":...}],"temperature","max_tokens"[,"seed"]},
/// reply text read from choices[0].message.content.
class HttpChatClient final : public ChatClient {
 public:
  HttpChatClient(HttpEndpoint endpoint, std::string model_id);

  std::string complete(const ChatRequest& request) override;
  const std::string& model_id() const override { return model_id_; }
  std::size_t attempts() const { return http_.attempts(); }

 private:
  JsonHttpClient http_;
  std::string model_id_;
};

}  // namespace abstain
