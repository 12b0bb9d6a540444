#include "abstain/entailment/verdict.h"

#include <cctype>

#include "abstain/core/types.h"
#include "abstain/error.h"

namespace abstain {

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kEntailment:
      return "entailment";
    case Verdict::kContradiction:
      return "contradiction";
    case Verdict::kNeutral:
      return "neutral";
  }
  return "neutral";
}

Verdict parse_verdict(std::string_view raw) {
  std::string text = trim(raw);
  for (auto& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::size_t end = 0;
  while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
  std::string token = text.substr(0, end);
  while (!token.empty() && std::ispunct(static_cast<unsigned char>(token.back()))) token.pop_back();

  if (token == "entailment") return Verdict::kEntailment;
  if (token == "contradiction") return Verdict::kContradiction;
  if (token == "neutral") return Verdict::kNeutral;
  throw UnrecognizedVerdict(std::string(raw));
}

}  // namespace abstain
