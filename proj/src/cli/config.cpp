#include "abstain/cli/config.h"

#include <set>

#include "abstain/core/record_io.h"
#include "abstain/error.h"

namespace abstain {

HttpEndpoint EndpointConfig::to_http(std::size_t max_in_flight) const {
  HttpEndpoint endpoint;
  endpoint.base_url = base_url.empty() ? env_or_empty("ABSTAIN_API_BASE") : base_url;
  endpoint.api_key = env_or_empty(api_key_env);
  endpoint.timeout = timeout;
  endpoint.max_retries = max_retries;
  endpoint.backoff = backoff;
  endpoint.max_in_flight = static_cast<int>(max_in_flight);
  if (endpoint.base_url.empty()) {
    throw ConfigError("no endpoint base_url configured and ABSTAIN_API_BASE is unset");
  }
  return endpoint;
}

namespace {

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j[key].is_null()) j[key].get_to(out);
}

void read_ms(const Json& j, const char* key, std::chrono::milliseconds& out) {
  if (j.contains(key) && !j[key].is_null()) out = std::chrono::milliseconds(j[key].get<std::int64_t>());
}

EndpointConfig endpoint_from_json(const Json& j) {
  EndpointConfig e;
  read_if(j, "base_url", e.base_url);
  read_if(j, "model_id", e.model_id);
  read_if(j, "api_key_env", e.api_key_env);
  read_ms(j, "timeout_ms", e.timeout);
  read_if(j, "max_retries", e.max_retries);
  read_ms(j, "backoff_ms", e.backoff);
  return e;
}

BackendConfig backend_from_json(std::string_view kind, const Json& j) {
  BackendConfig b;
  b.kind = parse_backend_kind(kind);
  read_if(j, "endpoint", b.endpoint);
  read_if(j, "model_id", b.model_id);
  std::string key_env = "ABSTAIN_API_KEY";
  read_if(j, "api_key_env", key_env);
  b.api_key = env_or_empty(key_env);
  if (b.kind != BackendKind::kMockExactMatch && b.endpoint.empty()) {
    b.endpoint = env_or_empty("ABSTAIN_API_BASE");
  }
  read_ms(j, "timeout_ms", b.timeout);
  read_if(j, "max_retries", b.max_retries);
  read_ms(j, "backoff_ms", b.backoff);
  read_if(j, "nli_separator", b.nli_separator);
  read_if(j, "max_tokens", b.max_tokens);
  std::string cache;
  read_if(j, "cache_path", cache);
  b.cache_path = cache;
  return b;
}

}  // namespace

BackendConfig PipelineConfig::backend(std::string_view kind) const {
  BackendConfig config;
  if (auto it = backends.find(std::string(kind)); it != backends.end()) {
    config = it->second;
  } else {
    config.kind = parse_backend_kind(kind);
    if (config.kind != BackendKind::kMockExactMatch) {
      config.endpoint = env_or_empty("ABSTAIN_API_BASE");
    }
  }
  config.max_in_flight = static_cast<int>(max_in_flight);
  if (config.cache_path.empty()) {
    config.cache_path = dir("cache") / ("entailment." + std::string(kind) + ".jsonl");
  }
  config.validate();
  return config;
}

void PipelineConfig::validate() const {
  if (run_id.empty() || run_id.find('/') != std::string::npos) {
    throw ConfigError("run_id must be a non-empty single path component");
  }
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be positive");
  if (trim(abstention_phrase).empty()) throw ConfigError("abstention_phrase must be non-empty");
  if (trim(abstention_stem).empty()) throw ConfigError("abstention_stem must be non-empty");
  if (!detect_abstention(abstention_phrase, abstention_stem)) {
    throw ConfigError("abstention_phrase must contain abstention_stem (case-insensitively)");
  }
  if (thresholds.empty()) throw ConfigError("threshold grid must be non-empty");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!(thresholds[i] >= 0.0)) throw ConfigError("thresholds must be non-negative");
    if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
      throw ConfigError("threshold grid must be strictly increasing");
    }
  }
  try {
    sampling.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  // The output root must be creatable: walk up to the nearest existing
  // ancestor and require it to be a directory.
  auto probe = std::filesystem::absolute(output_root);
  while (!probe.empty() && !std::filesystem::exists(probe) && probe != probe.root_path()) {
    probe = probe.parent_path();
  }
  if (!std::filesystem::is_directory(probe)) {
    throw ConfigError("output directory " + output_root.string() + " is not creatable");
  }
  for (const auto& [kind, backend] : backends) {
    if (!backend.cache_path.empty() && backend.cache_path.has_parent_path()) {
      auto parent = std::filesystem::absolute(backend.cache_path).parent_path();
      while (!std::filesystem::exists(parent) && parent != parent.root_path()) {
        parent = parent.parent_path();
      }
      if (!std::filesystem::is_directory(parent)) {
        throw ConfigError("cache_path for " + kind + " is not creatable");
      }
    }
  }
}

PipelineConfig config_from_json(const Json& j) {
  static const std::set<std::string> kKnown = {
      "run_id",  "output_dir", "seed",     "max_in_flight", "abstention_phrase",
      "abstention_stem", "thresholds", "datasets", "sampling", "model",
      "judge",   "entailment"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

  PipelineConfig c;
  try {
    read_if(j, "run_id", c.run_id);
    std::string out;
    read_if(j, "output_dir", out);
    if (!out.empty()) c.output_root = out;
    read_if(j, "seed", c.seed);
    read_if(j, "max_in_flight", c.max_in_flight);
    read_if(j, "abstention_phrase", c.abstention_phrase);
    read_if(j, "abstention_stem", c.abstention_stem);
    read_if(j, "thresholds", c.thresholds);
    if (j.contains("datasets")) {
      const auto& d = j["datasets"];
      read_if(d, "train_count", c.ingest.train_count);
      read_if(d, "val_count", c.ingest.val_count);
    }
    if (j.contains("sampling")) {
      const auto& s = j["sampling"];
      if (s.contains("setting")) c.sampling.setting = parse_setting(s["setting"].get<std::string>());
      read_if(s, "standard_temperature", c.sampling.standard_temperature);
      read_if(s, "sample_temperature", c.sampling.sample_temperature);
      read_if(s, "m", c.sampling.m);
      read_if(s, "eval_temperature", c.sampling.eval_temperature);
      if (s.contains("max_tokens") && !s["max_tokens"].is_null()) {
        c.sampling.max_tokens = s["max_tokens"].get<int>();
      }
      if (s.contains("seed") && !s["seed"].is_null()) c.sampling.seed = s["seed"].get<std::int64_t>();
    }
    if (j.contains("model")) c.model = endpoint_from_json(j["model"]);
    if (j.contains("judge")) c.judge = endpoint_from_json(j["judge"]);
    if (j.contains("entailment")) {
      for (const auto& [kind, value] : j["entailment"].items()) {
        c.backends.emplace(kind, backend_from_json(kind, value));
      }
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  c.ingest.seed = c.seed;
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return config_from_json(j);
}

}  // namespace abstain
