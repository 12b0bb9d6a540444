#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abstain/core/types.h"
#include "abstain/generation/chat_client.h"
#include "abstain/generation/sampler.h"

namespace abstain {

inline constexpr std::string_view kDefaultAbstentionStem = "i don't know";

/// Accuracy-judge prompt; gold answers are joined with "; ".
std::string render_judge_prompt(std::string_view question, std::span<const std::string> gold_answers,
                                std::string_view response);

/// True for "yes", false for "no" (first token, case- and punctuation-
/// insensitive). Anything else throws JudgeParseError.
bool parse_judge_reply(std::string_view raw);

struct Judgement {
  bool correct = false;
  std::string raw;
};

/// Asks the judge at temperature 0 whether `response` matches a gold answer.
Judgement judge_accuracy(std::string_view question, std::span<const std::string> gold_answers,
                         std::string_view response, ChatClient& judge);

/// Case-folded containment of the abstention stem. Typographic apostrophes
/// (U+2019) count as ASCII ones.
bool detect_abstention(std::string_view response, std::string_view stem = kDefaultAbstentionStem);

struct EvaluationFailure {
  std::string question_id;
  std::string reason;
};

struct EvaluationRun {
  std::vector<EvalOutcome> outcomes;        // input order
  std::vector<EvaluationFailure> failures;  // input order
};

/// Greedy-decodes each question with the model under test, then judges every
/// non-abstaining response. Abstentions are never judged. Judge replies are
/// cached by (judge model, prompt).
class ModelEvaluator {
 public:
  ModelEvaluator(ResponseSampler& model, ChatClient& judge, CompletionCache& judge_cache,
                 std::string abstention_stem = std::string(kDefaultAbstentionStem));

  /// Builds the outcome for an already generated response.
  EvalOutcome assess(const QuestionRecord& question, const std::string& response);
  EvalOutcome evaluate_one(const QuestionRecord& question);
  EvaluationRun evaluate(std::span<const QuestionRecord> questions, std::size_t max_in_flight);

 private:
  ResponseSampler& model_;
  ChatClient& judge_;
  CompletionCache& judge_cache_;
  std::string stem_;
};

}  // namespace abstain
