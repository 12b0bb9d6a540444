#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <semaphore>
#include <string>
#include <string_view>

#include "abstain/core/types.h"

namespace abstain {

struct HttpEndpoint {
  std::string base_url;  // e.g. http://127.0.0.1:8000/v1
  std::string api_key;   // sent as a bearer token when non-empty
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
  int max_in_flight = 8;
};

// JSON-over-HTTP POST with bounded concurrency and exponential backoff.
// Connection errors, timeouts, 429 and 5xx are retried; other statuses and
// unparseable bodies fail immediately.
class JsonHttpClient {
 public:
  explicit JsonHttpClient(HttpEndpoint endpoint);
  ~JsonHttpClient();

  JsonHttpClient(const JsonHttpClient&) = delete;
  JsonHttpClient& operator=(const JsonHttpClient&) = delete;

  /// POSTs `body` to base_url + path. Throws BackendError after retries.
  Json post(std::string_view path, const Json& body);

  /// Attempts made so far, retries included.
  std::size_t attempts() const { return attempts_.load(); }
  const HttpEndpoint& endpoint() const { return endpoint_; }

 private:
  struct Target;
  static std::unique_ptr<Target> parse_base_url(const std::string& url);

  HttpEndpoint endpoint_;
  std::unique_ptr<Target> target_;
  std::counting_semaphore<> in_flight_;
  std::atomic<std::size_t> attempts_{0};
};

/// Value of the environment variable, or empty.
std::string env_or_empty(const std::string& name);

}  // namespace abstain
