#pragma once

#include <string>
#include <string_view>

namespace abstain {

/// Few-shot prompt asking whether `answer_a` entails `answer_b` within the
/// context of `question`. The instruction and exemplars are fixed text.
std::string render_entailment_prompt(std::string_view question, std::string_view answer_a,
                                     std::string_view answer_b);

}  // namespace abstain
