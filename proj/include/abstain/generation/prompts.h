#pragma once

#include <string>
#include <string_view>

#include "abstain/core/types.h"

namespace abstain {

/// Answering-setting prompt with the question in its slot. Long-QA asks for
/// one complete sentence; Short-QA carries five fixed few-shot exemplars.
/// Throws ValidationError on a blank question.
std::string render_prompt(Setting setting, std::string_view question);

/// SHA-256 hex of render_prompt(setting, question).
std::string prompt_hash(Setting setting, std::string_view question);

}  // namespace abstain
