#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abstain/core/append_cache.h"
#include "abstain/core/types.h"
#include "abstain/generation/chat_client.h"

namespace abstain {

struct SamplingPlan {
  Setting setting = Setting::kLongQa;
  double standard_temperature = 0.1;
  double sample_temperature = 1.0;
  std::size_t m = 10;
  double eval_temperature = 0.0;  // greedy
  std::optional<int> max_tokens;  // default: 128 long_qa, 32 short_qa
  std::optional<std::int64_t> seed;

  void validate() const;
  int effective_max_tokens() const;
};

/// Completion texts keyed by digest(model, setting, text, temperature,
/// sample index, seed). Sample index -1 marks single (non-indexed) calls.
class CompletionCache {
 public:
  CompletionCache() = default;
  explicit CompletionCache(std::filesystem::path path) : store_(std::move(path)) {}

  static std::string key(std::string_view model_id, std::string_view setting,
                         std::string_view text, double temperature, int sample_index,
                         std::optional<std::int64_t> seed);

  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, const std::string& text);
  std::size_t size() const { return store_.size(); }

 private:
  AppendOnlyCache store_;
};

struct SamplingFailure {
  std::string question_id;
  std::string reason;
};

struct SamplingReport {
  std::vector<GenerationBundle> bundles;  // input order
  std::vector<SamplingFailure> failures;  // input order
};

/// Draws standard, high-temperature and greedy responses through a cache.
class ResponseSampler {
 public:
  ResponseSampler(ChatClient& chat, CompletionCache& cache, SamplingPlan plan);

  /// One completion at the standard temperature.
  std::string sample_standard(const QuestionRecord& question);
  /// plan.m completions at the sample temperature, in index order.
  std::vector<std::string> sample_high_temperature(const QuestionRecord& question);
  GenerationBundle sample_bundle(const QuestionRecord& question);
  /// One completion at the evaluation temperature.
  std::string greedy_response(const QuestionRecord& question);

  /// Samples every question with at most max_in_flight concurrent questions.
  /// A question that fails is reported and produces no bundle.
  SamplingReport sample_all(std::span<const QuestionRecord> questions, std::size_t max_in_flight);

  /// Completion requests a bundle pass would still send (cache misses).
  std::size_t pending_requests(std::span<const QuestionRecord> questions) const;

  const SamplingPlan& plan() const { return plan_; }

 private:
  std::string cache_key(const QuestionRecord& question, double temperature, int sample_index) const;
  std::string complete_cached(const QuestionRecord& question, double temperature,
                              int sample_index);

  ChatClient& chat_;
  CompletionCache& cache_;
  SamplingPlan plan_;
};

}  // namespace abstain
