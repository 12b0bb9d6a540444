#include "abstain/generation/chat_client.h"

#include "abstain/error.h"

namespace abstain {

HttpChatClient::HttpChatClient(HttpEndpoint endpoint, std::string model_id)
    : http_(std::move(endpoint)), model_id_(std::move(model_id)) {}

std::string HttpChatClient::complete(const ChatRequest& request) {
  Json body{{"model", model_id_},
            {"messages", Json::array({Json{{"role", "user"}, {"content", request.prompt}}})},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
  if (request.seed) body["seed"] = *request.seed;

  const Json reply = http_.post("/chat/completions", body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception& e) {
    throw BackendError(std::string("malformed chat completion: ") + e.what());
  }
}

}  // namespace abstain
