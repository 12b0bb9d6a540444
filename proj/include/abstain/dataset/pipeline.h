#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "abstain/core/types.h"

namespace abstain {

inline constexpr std::string_view kDefaultAbstentionPhrase = "I don't know the answer.";

struct IngestOptions {
  std::size_t train_count = 2000;
  std::size_t val_count = 500;
  std::uint64_t seed = 0;
};

struct Splits {
  std::vector<QuestionRecord> train;
  std::vector<QuestionRecord> validation;
};

/// Reads a raw QA source (one JSON object per line) into records with ids
/// `<tag>:<line-index>`. Accepts "answers" or "answer" as a string, a list of
/// strings, or an object with "text", "aliases" or "value". Context fields
/// are ignored (closed-book). Rows with a blank question or no answers are
/// skipped; repeated question texts keep their first occurrence.
/// Throws RecordError on a line that is not a JSON object with a string question.
std::vector<QuestionRecord> read_source(const std::filesystem::path& source, std::string_view tag);

/// Seeded uniform selection of train_count + val_count records without
/// replacement, then split. Each split is returned in pool order.
Splits select_splits(std::span<const QuestionRecord> pool, const IngestOptions& options);

Splits ingest(const std::filesystem::path& source, std::string_view tag, const IngestOptions& options);

/// Concatenation preserving per-input order. Throws ValidationError on an id
/// that appears in more than one input.
std::vector<QuestionRecord> combine(std::span<const std::vector<QuestionRecord>> splits);

enum class PartitionMode { kEntropy, kCorrectness, kQuantile };

std::string_view to_string(PartitionMode mode);
PartitionMode parse_partition_mode(std::string_view text);

/// H (abstain) and L (answer) sets over the scored question ids.
struct Partition {
  PartitionMode mode = PartitionMode::kEntropy;
  std::optional<double> threshold;  // nats; entropy mode only
  std::set<std::string> high_ids;
  std::set<std::string> low_ids;

  bool operator==(const Partition&) const = default;
};

void to_json(Json& j, const Partition& p);
void from_json(const Json& j, Partition& p);

/// SE > tau goes to H; SE <= tau goes to L.
Partition partition_by_entropy(std::span<const EntropyScore> scores, double tau);

/// Incorrect questions go to H, correct ones to L.
Partition partition_by_correctness(std::span<const std::pair<std::string, bool>> outcomes);

/// Same, but every id in `expected` must have an outcome.
Partition partition_by_correctness(std::span<const std::pair<std::string, bool>> outcomes,
                                   std::span<const std::string> expected);

/// The floor(fraction * n) highest-SE questions go to H (ties broken by id).
Partition partition_by_quantile(std::span<const EntropyScore> scores, double fraction);

/// Training rows sorted by question id: H rows carry the abstention phrase,
/// L rows the question's standard response.
std::vector<SftRecord> emit_sft(const Partition& partition,
                                std::span<const GenerationBundle> bundles,
                                std::span<const QuestionRecord> questions, Setting setting,
                                std::string_view abstention_phrase = kDefaultAbstentionPhrase);

/// 0.25, 0.50, ..., 2.25 nats.
std::vector<double> threshold_grid();

}  // namespace abstain
