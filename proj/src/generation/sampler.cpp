#include "abstain/generation/sampler.h"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "abstain/core/digest.h"
#include "abstain/core/parallel.h"
#include "abstain/error.h"
#include "abstain/generation/prompts.h"

namespace abstain {

void SamplingPlan::validate() const {
  if (m < 2) throw ValidationError("sampling plan: m must be at least 2");
  if (standard_temperature < 0 || sample_temperature < 0 || eval_temperature < 0) {
    throw ValidationError("sampling plan: temperatures must be non-negative");
  }
  if (standard_temperature >= sample_temperature) {
    throw ValidationError("sampling plan: standard_temperature must be below sample_temperature");
  }
  if (max_tokens && *max_tokens < 1) throw ValidationError("sampling plan: max_tokens must be positive");
}

int SamplingPlan::effective_max_tokens() const {
  if (max_tokens) return *max_tokens;
  return setting == Setting::kLongQa ? 128 : 32;
}

std::string CompletionCache::key(std::string_view model_id, std::string_view setting,
                                 std::string_view text, double temperature, int sample_index,
                                 std::optional<std::int64_t> seed) {
  const std::string temp = fmt::format("{}", temperature);
  const std::string index = std::to_string(sample_index);
  const std::string seed_text = seed ? std::to_string(*seed) : std::string("none");
  return digest_fields({model_id, setting, text, temp, index, seed_text});
}

std::optional<std::string> CompletionCache::get(const std::string& key) const {
  if (auto hit = store_.get(key)) return hit->get<std::string>();
  return std::nullopt;
}

void CompletionCache::put(const std::string& key, const std::string& text) { store_.put(key, text); }

ResponseSampler::ResponseSampler(ChatClient& chat, CompletionCache& cache, SamplingPlan plan)
    : chat_(chat), cache_(cache), plan_(std::move(plan)) {
  plan_.validate();
}

std::string ResponseSampler::cache_key(const QuestionRecord& question, double temperature,
                                       int sample_index) const {
  return CompletionCache::key(chat_.model_id(), to_string(plan_.setting), question.question,
                              temperature, sample_index, plan_.seed);
}

std::string ResponseSampler::complete_cached(const QuestionRecord& question, double temperature,
                                             int sample_index) {
  const std::string key = cache_key(question, temperature, sample_index);
  if (auto hit = cache_.get(key)) return *hit;

  ChatRequest request;
  request.prompt = render_prompt(plan_.setting, question.question);
  request.temperature = temperature;
  request.max_tokens = plan_.effective_max_tokens();
  if (plan_.seed) request.seed = *plan_.seed + std::max(sample_index, 0);
  std::string text = chat_.complete(request);
  if (trim(text).empty()) {
    throw EmptyCompletion("empty completion for " + question.id + " at temperature " +
                          fmt::format("{}", temperature));
  }
  cache_.put(key, text);
  return text;
}

std::string ResponseSampler::sample_standard(const QuestionRecord& question) {
  return complete_cached(question, plan_.standard_temperature, -1);
}

std::vector<std::string> ResponseSampler::sample_high_temperature(const QuestionRecord& question) {
  std::vector<std::string> samples;
  samples.reserve(plan_.m);
  for (std::size_t i = 0; i < plan_.m; ++i) {
    samples.push_back(complete_cached(question, plan_.sample_temperature, static_cast<int>(i)));
  }
  return samples;
}

std::string ResponseSampler::greedy_response(const QuestionRecord& question) {
  return complete_cached(question, plan_.eval_temperature, -1);
}

GenerationBundle ResponseSampler::sample_bundle(const QuestionRecord& question) {
  GenerationBundle bundle;
  bundle.question_id = question.id;
  bundle.setting = plan_.setting;
  bundle.standard_response = sample_standard(question);
  bundle.standard_temperature = plan_.standard_temperature;
  bundle.samples = sample_high_temperature(question);
  bundle.sample_temperature = plan_.sample_temperature;
  bundle.model_id = chat_.model_id();
  bundle.prompt_hash = prompt_hash(plan_.setting, question.question);
  return bundle;
}

SamplingReport ResponseSampler::sample_all(std::span<const QuestionRecord> questions,
                                           std::size_t max_in_flight) {
  std::vector<std::optional<GenerationBundle>> bundles(questions.size());
  std::vector<std::string> errors(questions.size());
  parallel_for(questions.size(), max_in_flight, [&](std::size_t i) {
    try {
      bundles[i] = sample_bundle(questions[i]);
    } catch (const Error& e) {
      spdlog::warn("sampling failed for {}: {}", questions[i].id, e.what());
      errors[i] = e.what();
    }
  });

  SamplingReport report;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (bundles[i]) {
      report.bundles.push_back(std::move(*bundles[i]));
    } else {
      report.failures.push_back({questions[i].id, errors[i]});
    }
  }
  return report;
}

std::size_t ResponseSampler::pending_requests(std::span<const QuestionRecord> questions) const {
  std::size_t pending = 0;
  for (const auto& q : questions) {
    if (!cache_.get(cache_key(q, plan_.standard_temperature, -1))) ++pending;
    for (std::size_t i = 0; i < plan_.m; ++i) {
      if (!cache_.get(cache_key(q, plan_.sample_temperature, static_cast<int>(i)))) ++pending;
    }
  }
  return pending;
}

}  // namespace abstain
