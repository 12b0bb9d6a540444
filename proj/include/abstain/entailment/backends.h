#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "abstain/core/append_cache.h"
#include "abstain/entailment/verdict.h"
#include "abstain/entropy/entropy.h"
#include "abstain/generation/chat_client.h"

namespace abstain {

enum class BackendKind { kNliService, kLlmIcl, kMockExactMatch };

std::string_view to_string(BackendKind kind);
/// Throws ConfigError for an unknown name.
BackendKind parse_backend_kind(std::string_view name);

struct BackendConfig {
  BackendKind kind = BackendKind::kMockExactMatch;
  std::string endpoint;  // required for service kinds, forbidden for the mock
  std::string model_id;
  std::string api_key;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{200};
  int max_in_flight = 8;
  std::filesystem::path cache_path;  // empty: in-memory cache only
  std::string nli_separator = " ";   // joins question and answer for NLI inputs
  int max_tokens = 8;                // llm_icl reply budget

  void validate() const;
};

/// Directional entailment judgement for (question, a, b).
class EntailmentBackend {
 public:
  virtual ~EntailmentBackend() = default;
  virtual std::string id() const = 0;
  virtual Verdict check_entailment(std::string_view question, std::string_view answer_a,
                                   std::string_view answer_b) = 0;
};

/// Case-insensitive, punctuation-free, whitespace-collapsed form used by the
/// mock backend.
std::string normalize_for_match(std::string_view text);

/// Deterministic test oracle: equality of normalize_for_match forms.
bool mock_equivalence(std::string_view question, std::string_view s, std::string_view s_prime);

class MockExactMatchBackend final : public EntailmentBackend {
 public:
  std::string id() const override { return "mock_exact_match"; }
  Verdict check_entailment(std::string_view question, std::string_view answer_a,
                           std::string_view answer_b) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// HTTP classifier. Request: {"premise": q + sep + a, "hypothesis": q + sep + b,
/// "model": model_id}; response: {"label": "entailment"|"contradiction"|"neutral"}.
class NliServiceBackend final : public EntailmentBackend {
 public:
  explicit NliServiceBackend(const BackendConfig& config);
  std::string id() const override;
  Verdict check_entailment(std::string_view question, std::string_view answer_a,
                           std::string_view answer_b) override;

 private:
  JsonHttpClient http_;
  std::string model_id_;
  std::string separator_;
};

/// Few-shot prompted chat model, decoded at temperature 0.
class LlmIclBackend final : public EntailmentBackend {
 public:
  LlmIclBackend(std::shared_ptr<ChatClient> chat, int max_tokens);
  std::string id() const override;
  Verdict check_entailment(std::string_view question, std::string_view answer_a,
                           std::string_view answer_b) override;

 private:
  std::shared_ptr<ChatClient> chat_;
  int max_tokens_;
};

/// Memoizes verdicts keyed by digest(backend id, question, a, b) in an
/// append-only cache file. Cached pairs never reach the inner backend.
class CachingBackend final : public EntailmentBackend {
 public:
  CachingBackend(std::unique_ptr<EntailmentBackend> inner, std::filesystem::path cache_path);
  std::string id() const override { return inner_id_; }
  Verdict check_entailment(std::string_view question, std::string_view answer_a,
                           std::string_view answer_b) override;
  std::size_t misses() const { return misses_.load(); }

 private:
  std::unique_ptr<EntailmentBackend> inner_;
  std::string inner_id_;
  AppendOnlyCache cache_;
  std::atomic<std::size_t> misses_{0};
};

/// Builds the configured backend wrapped in a CachingBackend.
std::unique_ptr<EntailmentBackend> make_backend(const BackendConfig& config);

/// Bidirectional entailment. Strings equal after trimming short-circuit to
/// true without contacting the backend.
bool are_semantically_equivalent(std::string_view question, std::string_view s,
                                 std::string_view s_prime, EntailmentBackend& backend);

EquivalenceOracle equivalence_oracle(EntailmentBackend& backend);

}  // namespace abstain
