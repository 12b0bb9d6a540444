#include "abstain/net/http_client.h"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <regex>
#include <thread>

#include "abstain/error.h"

namespace abstain {

struct JsonHttpClient::Target {
  std::string scheme_host_port;
  std::string path_prefix;
};

std::unique_ptr<JsonHttpClient::Target> JsonHttpClient::parse_base_url(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch match;
  if (!std::regex_match(url, match, kUrl)) {
    throw ConfigError("invalid endpoint URL '" + url + "'");
  }
  auto target = std::make_unique<JsonHttpClient::Target>();
  target->scheme_host_port = match[1].str();
  target->path_prefix = match[2].str();
  while (!target->path_prefix.empty() && target->path_prefix.back() == '/') {
    target->path_prefix.pop_back();
  }
  return target;
}

namespace {

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

JsonHttpClient::JsonHttpClient(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      target_(parse_base_url(endpoint_.base_url)),
      in_flight_(std::max(1, endpoint_.max_in_flight)) {}

JsonHttpClient::~JsonHttpClient() = default;

Json JsonHttpClient::post(std::string_view path, const Json& body) {
  std::string full_path = target_->path_prefix + std::string(path);
  if (full_path.empty()) full_path = "/";
  const std::string payload = body.dump();
  httplib::Headers headers;
  if (!endpoint_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + endpoint_.api_key);
  }
  spdlog::debug("POST {}{} auth={} body={}", target_->scheme_host_port, full_path,
                endpoint_.api_key.empty() ? "none" : "Bearer ***", payload);

  std::string last_error;
  auto delay = endpoint_.backoff;
  const int max_attempts = 1 + std::max(0, endpoint_.max_retries);
  int attempt = 0;
  for (; attempt < max_attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Result result;
    {
      in_flight_.acquire();
      ++attempts_;
      httplib::Client client(target_->scheme_host_port);
      const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
      const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
          endpoint_.timeout - seconds);
      client.set_connection_timeout(seconds.count(), micros.count());
      client.set_read_timeout(seconds.count(), micros.count());
      client.set_write_timeout(seconds.count(), micros.count());
      result = client.Post(full_path, headers, payload, "application/json");
      in_flight_.release();
    }
    if (!result) {
      last_error = "transport error: " + httplib::to_string(result.error());
      spdlog::debug("POST {} attempt {} failed: {}", full_path, attempt + 1, last_error);
      continue;
    }
    const int status = result->status;
    spdlog::debug("POST {} -> {} body={}", full_path, status, result->body);
    if (status >= 200 && status < 300) {
      try {
        return Json::parse(result->body);
      } catch (const Json::exception& e) {
        throw BackendError("unparseable response from " + full_path + ": " + e.what());
      }
    }
    last_error = "HTTP " + std::to_string(status);
    if (!retryable_status(status)) {
      ++attempt;
      break;
    }
  }
  throw BackendError("POST " + target_->scheme_host_port + full_path + " failed after " +
                     std::to_string(attempt) + " attempt(s): " + last_error);
}

std::string env_or_empty(const std::string& name) {
  if (name.empty()) return {};
  const char* value = std::getenv(name.c_str());
  return value ? std::string(value) : std::string();
}

}  // namespace abstain
