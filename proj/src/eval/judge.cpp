#include "abstain/eval/judge.h"

#include <cctype>

#include <spdlog/spdlog.h>

#include "abstain/core/parallel.h"
#include "abstain/error.h"

namespace abstain {

namespace {

constexpr int kJudgeMaxTokens = 8;

std::string lowercase(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Serves repeated judge prompts from the completion cache.
class CachedJudge final : public ChatClient {
 public:
  CachedJudge(ChatClient& inner, CompletionCache& cache) : inner_(inner), cache_(cache) {}

  std::string complete(const ChatRequest& request) override {
    const auto key = CompletionCache::key(inner_.model_id(), "judge", request.prompt,
                                          request.temperature, -1, request.seed);
    if (auto hit = cache_.get(key)) return *hit;
    std::string reply = inner_.complete(request);
    // Only well-formed replies are cached so a drifting judge is re-asked.
    parse_judge_reply(reply);
    cache_.put(key, reply);
    return reply;
  }
  const std::string& model_id() const override { return inner_.model_id(); }

 private:
  ChatClient& inner_;
  CompletionCache& cache_;
};

}  // namespace

std::string render_judge_prompt(std::string_view question, std::span<const std::string> gold_answers,
                                std::string_view response) {
  std::string gold;
  for (std::size_t i = 0; i < gold_answers.size(); ++i) {
    if (i > 0) gold += "; ";
    gold += gold_answers[i];
  }
  std::string out;
  out.append("We are assessing the quality of answers to the following question: ")
      .append(question)
      .append("\n");
  out.append("The following are expected answers to this question: ").append(gold).append("\n");
  out.append("The proposed answer is: ").append(response).append("\n");
  out.append(
      "Within the context of the question, does the proposed answer mean the same as any of the "
      "expected answers?\n");
  out.append("Respond only with yes or no.\n");
  out.append("Response:");
  return out;
}

bool parse_judge_reply(std::string_view raw) {
  const std::string text = lowercase(trim(raw));
  std::size_t end = 0;
  while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
  std::string token = text.substr(0, end);
  while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) token.pop_back();
  if (token == "yes") return true;
  if (token == "no") return false;
  throw JudgeParseError(std::string(raw));
}

Judgement judge_accuracy(std::string_view question, std::span<const std::string> gold_answers,
                         std::string_view response, ChatClient& judge) {
  ChatRequest request;
  request.prompt = render_judge_prompt(question, gold_answers, response);
  request.temperature = 0.0;
  request.max_tokens = kJudgeMaxTokens;
  Judgement j;
  j.raw = judge.complete(request);
  j.correct = parse_judge_reply(j.raw);
  return j;
}

bool detect_abstention(std::string_view response, std::string_view stem) {
  auto fold = [](std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      // U+2019 RIGHT SINGLE QUOTATION MARK is E2 80 99 in UTF-8.
      if (text.compare(i, 3, "\xE2\x80\x99") == 0) {
        out.push_back('\'');
        i += 2;
        continue;
      }
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(text[i]))));
    }
    return out;
  };
  const std::string needle = fold(stem);
  if (needle.empty()) return false;
  return fold(response).find(needle) != std::string::npos;
}

ModelEvaluator::ModelEvaluator(ResponseSampler& model, ChatClient& judge,
                               CompletionCache& judge_cache, std::string abstention_stem)
    : model_(model), judge_(judge), judge_cache_(judge_cache), stem_(std::move(abstention_stem)) {}

EvalOutcome ModelEvaluator::assess(const QuestionRecord& question, const std::string& response) {
  EvalOutcome outcome;
  outcome.question_id = question.id;
  outcome.response = response;
  outcome.abstained = detect_abstention(response, stem_);
  if (!outcome.abstained) {
    CachedJudge judge(judge_, judge_cache_);
    auto verdict = judge_accuracy(question.question, question.gold_answers, response, judge);
    outcome.correct = verdict.correct;
    outcome.judge_raw = std::move(verdict.raw);
  }
  return outcome;
}

EvalOutcome ModelEvaluator::evaluate_one(const QuestionRecord& question) {
  return assess(question, model_.greedy_response(question));
}

EvaluationRun ModelEvaluator::evaluate(std::span<const QuestionRecord> questions,
                                       std::size_t max_in_flight) {
  std::vector<std::optional<EvalOutcome>> outcomes(questions.size());
  std::vector<std::string> errors(questions.size());
  parallel_for(questions.size(), max_in_flight, [&](std::size_t i) {
    try {
      outcomes[i] = evaluate_one(questions[i]);
    } catch (const Error& e) {
      spdlog::warn("evaluation failed for {}: {}", questions[i].id, e.what());
      errors[i] = e.what();
    }
  });
  EvaluationRun run;
  for (std::size_t i = 0; i < questions.size(); ++i) {
    if (outcomes[i]) {
      run.outcomes.push_back(std::move(*outcomes[i]));
    } else {
      run.failures.push_back({questions[i].id, errors[i]});
    }
  }
  return run;
}

}  // namespace abstain
