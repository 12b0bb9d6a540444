#include "abstain/generation/prompts.h"

#include "abstain/core/digest.h"
#include "abstain/error.h"

namespace abstain {

namespace {

constexpr std::string_view kLongQaHeader =
    "Answer the following question in a single complete sentence. Short-form answers without a "
    "proper subject and verb are not allowed. There should be a subject, verb, and an object in "
    "your complete sentence and your answers should address the question directly.\n";

constexpr std::string_view kShortQaHeader =
    "Answer the following question as briefly as possible.\n"
    "Question: Which chemical element has the chemical symbol Ca?\n"
    "Answer: Calcium\n"
    "\n"
    "Question: How many TAp73 isoforms have been identified in humans?\n"
    "Answer: Seven\n"
    "\n"
    "Question: What is the powerhouse of the cell?\n"
    "Answer: Mitochondria\n"
    "\n"
    "Question: Who authored the Harry Potter book series?\n"
    "Answer: J.K. Rowling\n"
    "\n"
    "Question: What countries is the G7 made up of?\n"
    "Answer: Canada, France, Germany, Italy, Japan, the United Kingdom and the United States.\n"
    "\n";

}  // namespace

std::string render_prompt(Setting setting, std::string_view question) {
  if (trim(question).empty()) throw ValidationError("render_prompt: empty question");
  std::string out(setting == Setting::kLongQa ? kLongQaHeader : kShortQaHeader);
  out.append("Question: ").append(question).append("\nAnswer: ");
  return out;
}

std::string prompt_hash(Setting setting, std::string_view question) {
  return sha256_hex(render_prompt(setting, question));
}

}  // namespace abstain
