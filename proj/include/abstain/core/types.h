#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace abstain {

// Ordered so serialized records keep their declared field order.
using Json = nlohmann::ordered_json;

enum class Split { kTrain, kValidation, kFull };
enum class Setting { kLongQa, kShortQa };
enum class PartitionSide { kHighEntropy, kLowEntropy };

std::string_view to_string(Split split);
std::string_view to_string(Setting setting);
std::string_view to_string(PartitionSide side);

Split parse_split(std::string_view text);
Setting parse_setting(std::string_view text);
PartitionSide parse_partition_side(std::string_view text);

/// A QA item. Ingested ids follow `<dataset>:<index-in-source>`.
struct QuestionRecord {
  std::string id;
  std::string question;
  std::vector<std::string> gold_answers;
  std::string dataset;
  Split split = Split::kFull;

  bool operator==(const QuestionRecord&) const = default;
};

/// One standard (low temperature) response plus m high-temperature samples.
struct GenerationBundle {
  std::string question_id;
  Setting setting = Setting::kLongQa;
  std::string standard_response;
  double standard_temperature = 0.1;
  std::vector<std::string> samples;
  double sample_temperature = 1.0;
  std::string model_id;
  std::string prompt_hash;

  bool operator==(const GenerationBundle&) const = default;
};

/// Entropies in nats.
struct EntropyScore {
  std::string question_id;
  double classical_entropy = 0.0;
  double semantic_entropy = 0.0;
  std::string backend_id;
  std::size_t m = 0;

  bool operator==(const EntropyScore&) const = default;
};

struct SftRecord {
  std::string question_id;
  Setting setting = Setting::kLongQa;
  std::string prompt;
  std::string question;
  std::string label;
  PartitionSide partition = PartitionSide::kLowEntropy;

  bool operator==(const SftRecord&) const = default;
};

/// `correct` is present exactly when the response did not abstain.
struct EvalOutcome {
  std::string question_id;
  std::string response;
  bool abstained = false;
  std::optional<bool> correct;
  std::string judge_raw;

  bool operator==(const EvalOutcome&) const = default;
};

// Invariant checks. Each throws ValidationError naming the offending field.
void validate(const QuestionRecord& record);
void validate(const GenerationBundle& bundle);
void validate(const EntropyScore& score);
void validate(const SftRecord& record);
void validate(const EvalOutcome& outcome);

// Unique key used for duplicate detection in record files.
inline std::optional<std::string> record_key(const QuestionRecord& r) { return r.id; }
inline std::optional<std::string> record_key(const GenerationBundle& r) { return r.question_id; }
inline std::optional<std::string> record_key(const EntropyScore& r) { return r.question_id; }
inline std::optional<std::string> record_key(const SftRecord& r) { return r.question_id; }
inline std::optional<std::string> record_key(const EvalOutcome& r) { return r.question_id; }

void to_json(Json& j, const QuestionRecord& r);
void from_json(const Json& j, QuestionRecord& r);
void to_json(Json& j, const GenerationBundle& r);
void from_json(const Json& j, GenerationBundle& r);
void to_json(Json& j, const EntropyScore& r);
void from_json(const Json& j, EntropyScore& r);
void to_json(Json& j, const SftRecord& r);
void from_json(const Json& j, SftRecord& r);
void to_json(Json& j, const EvalOutcome& r);
void from_json(const Json& j, EvalOutcome& r);

std::string trim(std::string_view text);

}  // namespace abstain
