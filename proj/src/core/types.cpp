#include "abstain/core/types.h"

#include <cctype>
#include <cmath>

#include "abstain/error.h"

namespace abstain {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::pair<Enum, std::string_view> (&table)[N],
                std::string_view kind) {
  for (const auto& [value, name] : table) {
    if (name == text) return value;
  }
  throw ValidationError("unknown " + std::string(kind) + " '" + std::string(text) + "'");
}

constexpr std::pair<Split, std::string_view> kSplits[] = {
    {Split::kTrain, "train"}, {Split::kValidation, "validation"}, {Split::kFull, "full"}};
constexpr std::pair<Setting, std::string_view> kSettings[] = {
    {Setting::kLongQa, "long_qa"}, {Setting::kShortQa, "short_qa"}};
constexpr std::pair<PartitionSide, std::string_view> kSides[] = {
    {PartitionSide::kHighEntropy, "high_entropy"}, {PartitionSide::kLowEntropy, "low_entropy"}};

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

// Slack for the ln(m) bound; entropies are computed, not exact.
constexpr double kBoundSlack = 1e-12;

}  // namespace

std::string_view to_string(Split split) { return kSplits[static_cast<int>(split)].second; }
std::string_view to_string(Setting setting) { return kSettings[static_cast<int>(setting)].second; }
std::string_view to_string(PartitionSide side) { return kSides[static_cast<int>(side)].second; }

Split parse_split(std::string_view text) { return parse_enum(text, kSplits, "split"); }
Setting parse_setting(std::string_view text) { return parse_enum(text, kSettings, "setting"); }
PartitionSide parse_partition_side(std::string_view text) {
  return parse_enum(text, kSides, "partition");
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  return std::string(text.substr(begin, end - begin));
}

void validate(const QuestionRecord& r) {
  require(!r.id.empty(), "question record: empty id");
  require(!trim(r.question).empty(), "question record " + r.id + ": empty question");
  require(!r.gold_answers.empty(), "question record " + r.id + ": no gold answers");
  require(!r.dataset.empty(), "question record " + r.id + ": empty dataset tag");
}

void validate(const GenerationBundle& b) {
  require(!b.question_id.empty(), "bundle: empty question_id");
  require(!b.samples.empty(), "bundle " + b.question_id + ": no samples");
  require(b.standard_temperature >= 0.0, "bundle " + b.question_id + ": negative temperature");
  require(b.standard_temperature < b.sample_temperature,
          "bundle " + b.question_id + ": standard_temperature must be below sample_temperature");
  require(!b.prompt_hash.empty(), "bundle " + b.question_id + ": empty prompt_hash");
}

void validate(const EntropyScore& s) {
  require(!s.question_id.empty(), "entropy score: empty question_id");
  require(s.m >= 1, "entropy score " + s.question_id + ": m must be positive");
  const double upper = std::log(static_cast<double>(s.m)) + kBoundSlack;
  require(s.semantic_entropy >= 0.0 && s.semantic_entropy <= s.classical_entropy + kBoundSlack &&
              s.classical_entropy <= upper,
          "entropy score " + s.question_id + ": violates 0 <= SE <= classical <= ln(m)");
}

void validate(const SftRecord& r) {
  require(!r.question_id.empty(), "sft record: empty question_id");
  require(!r.prompt.empty(), "sft record " + r.question_id + ": empty prompt");
  require(!r.label.empty(), "sft record " + r.question_id + ": empty label");
}

void validate(const EvalOutcome& o) {
  require(!o.question_id.empty(), "eval outcome: empty question_id");
  require(o.abstained != o.correct.has_value(),
          "eval outcome " + o.question_id + ": correct must be present iff not abstained");
}

void to_json(Json& j, const QuestionRecord& r) {
  j = Json{{"id", r.id},
           {"question", r.question},
           {"gold_answers", r.gold_answers},
           {"dataset", r.dataset},
           {"split", to_string(r.split)}};
}

void from_json(const Json& j, QuestionRecord& r) {
  j.at("id").get_to(r.id);
  j.at("question").get_to(r.question);
  j.at("gold_answers").get_to(r.gold_answers);
  j.at("dataset").get_to(r.dataset);
  r.split = parse_split(j.at("split").get<std::string>());
}

void to_json(Json& j, const GenerationBundle& b) {
  j = Json{{"question_id", b.question_id},
           {"setting", to_string(b.setting)},
           {"standard_response", b.standard_response},
           {"standard_temperature", b.standard_temperature},
           {"samples", b.samples},
           {"sample_temperature", b.sample_temperature},
           {"model_id", b.model_id},
           {"prompt_hash", b.prompt_hash}};
}

void from_json(const Json& j, GenerationBundle& b) {
  j.at("question_id").get_to(b.question_id);
  b.setting = parse_setting(j.at("setting").get<std::string>());
  j.at("standard_response").get_to(b.standard_response);
  j.at("standard_temperature").get_to(b.standard_temperature);
  j.at("samples").get_to(b.samples);
  j.at("sample_temperature").get_to(b.sample_temperature);
  j.at("model_id").get_to(b.model_id);
  j.at("prompt_hash").get_to(b.prompt_hash);
}

void to_json(Json& j, const EntropyScore& s) {
  j = Json{{"question_id", s.question_id},
           {"classical_entropy", s.classical_entropy},
           {"semantic_entropy", s.semantic_entropy},
           {"backend_id", s.backend_id},
           {"m", s.m}};
}

void from_json(const Json& j, EntropyScore& s) {
  j.at("question_id").get_to(s.question_id);
  j.at("classical_entropy").get_to(s.classical_entropy);
  j.at("semantic_entropy").get_to(s.semantic_entropy);
  j.at("backend_id").get_to(s.backend_id);
  j.at("m").get_to(s.m);
}

void to_json(Json& j, const SftRecord& r) {
  j = Json{{"question_id", r.question_id},
           {"setting", to_string(r.setting)},
           {"prompt", r.prompt},
           {"question", r.question},
           {"label", r.label},
           {"partition", to_string(r.partition)}};
}

void from_json(const Json& j, SftRecord& r) {
  j.at("question_id").get_to(r.question_id);
  r.setting = parse_setting(j.at("setting").get<std::string>());
  j.at("prompt").get_to(r.prompt);
  j.at("question").get_to(r.question);
  j.at("label").get_to(r.label);
  r.partition = parse_partition_side(j.at("partition").get<std::string>());
}

void to_json(Json& j, const EvalOutcome& o) {
  j = Json{{"question_id", o.question_id},
           {"response", o.response},
           {"abstained", o.abstained},
           {"correct", o.correct ? Json(*o.correct) : Json(nullptr)},
           {"judge_raw", o.judge_raw}};
}

void from_json(const Json& j, EvalOutcome& o) {
  j.at("question_id").get_to(o.question_id);
  j.at("response").get_to(o.response);
  j.at("abstained").get_to(o.abstained);
  const auto& correct = j.at("correct");
  o.correct = correct.is_null() ? std::nullopt : std::optional<bool>(correct.get<bool>());
  j.at("judge_raw").get_to(o.judge_raw);
}

}  // namespace abstain
