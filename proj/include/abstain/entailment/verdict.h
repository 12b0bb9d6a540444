#pragma once

#include <string>
#include <string_view>

namespace abstain {

enum class Verdict { kEntailment, kContradiction, kNeutral };

std::string_view to_string(Verdict verdict);

/// Strict parse of a backend reply: the first whitespace-delimited token,
/// lowercased with trailing punctuation removed, must be one of the three
/// verdict words. Anything else throws UnrecognizedVerdict.
Verdict parse_verdict(std::string_view raw);

}  // namespace abstain
