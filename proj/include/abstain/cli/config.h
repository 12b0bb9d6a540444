#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "abstain/core/types.h"
#include "abstain/dataset/pipeline.h"
#include "abstain/entailment/backends.h"
#include "abstain/eval/judge.h"
#include "abstain/generation/sampler.h"
#include "abstain/net/http_client.h"

namespace abstain {

/// A chat-completion endpoint. The key is read from `api_key_env` at use
/// time; base_url falls back to $ABSTAIN_API_BASE.
struct EndpointConfig {
  std::string base_url;
  std::string model_id;
  std::string api_key_env = "ABSTAIN_API_KEY";
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{200};

  HttpEndpoint to_http(std::size_t max_in_flight) const;
};

/// Everything a pipeline run needs. Precedence: built-in defaults, then the
/// config file, then command-line flags.
struct PipelineConfig {
  std::string run_id = "default";
  std::filesystem::path output_root = "out";
  std::uint64_t seed = 0;
  std::size_t max_in_flight = 8;
  std::string abstention_phrase = std::string(kDefaultAbstentionPhrase);
  std::string abstention_stem = std::string(kDefaultAbstentionStem);
  std::vector<double> thresholds = threshold_grid();
  IngestOptions ingest;
  SamplingPlan sampling;
  EndpointConfig model;
  EndpointConfig judge;
  std::map<std::string, BackendConfig> backends;  // keyed by backend kind name

  std::filesystem::path run_dir() const { return output_root / run_id; }
  std::filesystem::path dir(std::string_view kind) const { return run_dir() / kind; }

  /// Backend settings for `kind`, with the shared cache path filled in.
  /// Throws ConfigError for unknown kinds or invalid settings.
  BackendConfig backend(std::string_view kind) const;

  void validate() const;
};

/// Parses a config object. Unknown top-level keys are rejected.
PipelineConfig config_from_json(const Json& json);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace abstain
