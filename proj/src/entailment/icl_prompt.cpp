#include "abstain/entailment/icl_prompt.h"

namespace abstain {

namespace {

constexpr std::string_view kAsk =
    "Does Possible Answer 1 semantically entail Possible Answer 2? Respond with only one word: "
    "entailment, contradiction, or neutral.\n";

constexpr std::string_view kInstruction =
    "We are given two possible answers to a question, \"Possible Answer 1\" and \"Possible "
    "Answer 2\". In this task, we are trying to evaluate whether \"Possible Answer 1\" "
    "semantically entail \"Possible Answer 2\".\n\n";

struct Exemplar {
  std::string_view question;
  std::string_view answer_a;
  std::string_view answer_b;
  std::string_view verdict;
};

constexpr Exemplar kExemplars[] = {
    {"\"By what name is singer 'Anthony Dominic Benevetto' better known?\"",
     "The singer Anthony Dominic Benevetto is better known as Toni Basil.",
     "The singer Anthony Dominic Benevetto is better known as Antonio Carlos Jobim.",
     "contradiction"},
    {"\"Which wife of Henry VIII had already married twice before she became queen, and married "
     "for a fourth time after Henry's death?\"",
     "Anne Boleyn is the wife of Henry VIII.", "Anne Boleyn is the answer.", "entailment"},
    {"\"Who did Simple Simon meet on his way to the fair?\"", "He met a pie-man.",
     "He met the following: a pie-man, a horse, a cow, and a fox.", "neutral"},
    {"\"The most northerly part of mainland Australia is in which state?\"",
     "Queensland is the most northerly part of mainland Australia.",
     "The most northerly part of mainland Australia is Western Australia.", "contradiction"},
    {"\"The most northerly part of mainland Australia is in which state?\"",
     "It is in Queensland, in Western Australia.", "Queensland.", "entailment"},
    {"\"David Jason starred as Inspector Frost, but who played his boss Superintendent Norman "
     "Mullet?\"",
     "Stephen McGann played his boss.",
     "Norman Mullet played his boss in Superintendent Norman Mullet.", "contradiction"},
};

void append_block(std::string& out, std::string_view question, std::string_view a,
                  std::string_view b) {
  out.append("Question: ").append(question).append("\n");
  out.append("Possible Answer 1: ").append(a).append("\n");
  out.append("Possible Answer 2: ").append(b).append("\n");
  out.append(kAsk);
  out.append("Answer: ");
}

}  // namespace

std::string render_entailment_prompt(std::string_view question, std::string_view answer_a,
                                     std::string_view answer_b) {
  std::string out(kInstruction);
  for (const auto& ex : kExemplars) {
    append_block(out, ex.question, ex.answer_a, ex.answer_b);
    out.append(ex.verdict).append("\n\n");
  }
  append_block(out, question, answer_a, answer_b);
  return out;
}

}  // namespace abstain
