#include "abstain/dataset/pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include <spdlog/spdlog.h>

#include "abstain/core/record_io.h"
#include "abstain/error.h"
#include "abstain/generation/prompts.h"

namespace abstain {

namespace {

std::vector<std::string> answers_from(const Json& value) {
  std::vector<std::string> out;
  auto push = [&out](const Json& v) {
    if (v.is_string() && !trim(v.get<std::string>()).empty()) out.push_back(v.get<std::string>());
  };
  if (value.is_string()) {
    push(value);
  } else if (value.is_array()) {
    for (const auto& v : value) push(v);
  } else if (value.is_object()) {
    for (const char* field : {"text", "aliases", "value"}) {
      if (!value.contains(field)) continue;
      for (auto& a : answers_from(value[field])) {
        if (std::find(out.begin(), out.end(), a) == out.end()) out.push_back(std::move(a));
      }
    }
  }
  return out;
}

// Uniform integer in [0, bound) from the raw 64-bit engine output. Kept off
// std::uniform_int_distribution so selections match across standard libraries.
std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = engine();
  } while (draw >= limit);
  return draw % bound;
}

void check_unique_scores(std::span<const EntropyScore> scores) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : scores) {
    if (!seen.insert(s.question_id).second) {
      throw ValidationError("duplicate entropy score for " + s.question_id);
    }
  }
}

}  // namespace

std::vector<QuestionRecord> read_source(const std::filesystem::path& source, std::string_view tag) {
  const auto lines = split_lines(read_file(source));
  std::vector<QuestionRecord> records;
  std::unordered_set<std::string> seen_questions;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Json row;
    try {
      row = Json::parse(lines[i]);
    } catch (const Json::exception& e) {
      throw RecordError(source.string(), i + 1, std::string("malformed source row: ") + e.what());
    }
    if (!row.is_object() || !row.contains("question") || !row["question"].is_string()) {
      throw RecordError(source.string(), i + 1, "source row needs a string 'question'");
    }
    QuestionRecord record;
    record.id = std::string(tag) + ":" + std::to_string(i);
    record.question = trim(row["question"].get<std::string>());
    if (row.contains("answers")) {
      record.gold_answers = answers_from(row["answers"]);
    } else if (row.contains("answer")) {
      record.gold_answers = answers_from(row["answer"]);
    }
    record.dataset = std::string(tag);
    record.split = Split::kFull;
    if (record.question.empty() || record.gold_answers.empty()) {
      ++skipped;
      continue;
    }
    if (!seen_questions.insert(record.question).second) {
      ++skipped;
      continue;
    }
    records.push_back(std::move(record));
  }
  if (skipped > 0) spdlog::info("{}: skipped {} unusable or duplicate rows", source.string(), skipped);
  return records;
}

Splits select_splits(std::span<const QuestionRecord> pool, const IngestOptions& options) {
  const std::size_t wanted = options.train_count + options.val_count;
  if (pool.size() < wanted) {
    throw ValidationError("need " + std::to_string(wanted) + " usable QA pairs, source has " +
                          std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 engine(options.seed);
  // Partial Fisher-Yates: the first `wanted` slots are a uniform sample.
  for (std::size_t i = 0; i < wanted; ++i) {
    const std::size_t j = i + bounded(engine, order.size() - i);
    std::swap(order[i], order[j]);
  }
  std::vector<std::size_t> train(order.begin(), order.begin() + options.train_count);
  std::vector<std::size_t> validation(order.begin() + options.train_count, order.begin() + wanted);
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());

  Splits splits;
  for (auto i : train) {
    splits.train.push_back(pool[i]);
    splits.train.back().split = Split::kTrain;
  }
  for (auto i : validation) {
    splits.validation.push_back(pool[i]);
    splits.validation.back().split = Split::kValidation;
  }
  return splits;
}

Splits ingest(const std::filesystem::path& source, std::string_view tag, const IngestOptions& options) {
  const auto pool = read_source(source, tag);
  return select_splits(pool, options);
}

std::vector<QuestionRecord> combine(std::span<const std::vector<QuestionRecord>> splits) {
  std::vector<QuestionRecord> out;
  std::unordered_set<std::string> ids;
  for (const auto& split : splits) {
    for (const auto& record : split) {
      if (!ids.insert(record.id).second) {
        throw ValidationError("id collision while combining splits: " + record.id);
      }
      out.push_back(record);
    }
  }
  return out;
}

std::string_view to_string(PartitionMode mode) {
  switch (mode) {
    case PartitionMode::kEntropy:
      return "entropy";
    case PartitionMode::kCorrectness:
      return "correctness";
    case PartitionMode::kQuantile:
      return "quantile";
  }
  return "entropy";
}

PartitionMode parse_partition_mode(std::string_view text) {
  if (text == "entropy") return PartitionMode::kEntropy;
  if (text == "correctness") return PartitionMode::kCorrectness;
  if (text == "quantile") return PartitionMode::kQuantile;
  throw ValidationError("unknown partition mode '" + std::string(text) + "'");
}

void to_json(Json& j, const Partition& p) {
  j = Json{{"mode", to_string(p.mode)},
           {"threshold", p.threshold ? Json(*p.threshold) : Json(nullptr)},
           {"high_ids", p.high_ids},
           {"low_ids", p.low_ids}};
}

void from_json(const Json& j, Partition& p) {
  p.mode = parse_partition_mode(j.at("mode").get<std::string>());
  const auto& threshold = j.at("threshold");
  p.threshold = threshold.is_null() ? std::nullopt : std::optional<double>(threshold.get<double>());
  p.high_ids = j.at("high_ids").get<std::set<std::string>>();
  p.low_ids = j.at("low_ids").get<std::set<std::string>>();
  for (const auto& id : p.high_ids) {
    if (p.low_ids.count(id)) throw ValidationError("partition: " + id + " is in both H and L");
  }
}

Partition partition_by_entropy(std::span<const EntropyScore> scores, double tau) {
  if (!(tau >= 0.0)) throw ValidationError("partition threshold must be non-negative");
  check_unique_scores(scores);
  Partition p;
  p.mode = PartitionMode::kEntropy;
  p.threshold = tau;
  for (const auto& s : scores) {
    (s.semantic_entropy > tau ? p.high_ids : p.low_ids).insert(s.question_id);
  }
  return p;
}

Partition partition_by_correctness(std::span<const std::pair<std::string, bool>> outcomes) {
  Partition p;
  p.mode = PartitionMode::kCorrectness;
  for (const auto& [id, correct] : outcomes) {
    if (p.high_ids.count(id) || p.low_ids.count(id)) {
      throw ValidationError("duplicate correctness outcome for " + id);
    }
    (correct ? p.low_ids : p.high_ids).insert(id);
  }
  return p;
}

Partition partition_by_correctness(std::span<const std::pair<std::string, bool>> outcomes,
                                   std::span<const std::string> expected) {
  Partition p = partition_by_correctness(outcomes);
  for (const auto& id : expected) {
    if (!p.high_ids.count(id) && !p.low_ids.count(id)) {
      throw ValidationError("missing correctness outcome for " + id);
    }
  }
  return p;
}

Partition partition_by_quantile(std::span<const EntropyScore> scores, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw ValidationError("quantile fraction must lie in [0, 1]");
  }
  check_unique_scores(scores);
  std::vector<const EntropyScore*> ranked;
  for (const auto& s : scores) ranked.push_back(&s);
  std::sort(ranked.begin(), ranked.end(), [](const EntropyScore* a, const EntropyScore* b) {
    if (a->semantic_entropy != b->semantic_entropy) return a->semantic_entropy > b->semantic_entropy;
    return a->question_id < b->question_id;
  });
  const auto high_count = static_cast<std::size_t>(std::floor(fraction * ranked.size()));
  Partition p;
  p.mode = PartitionMode::kQuantile;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    (i < high_count ? p.high_ids : p.low_ids).insert(ranked[i]->question_id);
  }
  return p;
}

std::vector<SftRecord> emit_sft(const Partition& partition,
                                std::span<const GenerationBundle> bundles,
                                std::span<const QuestionRecord> questions, Setting setting,
                                std::string_view abstention_phrase) {
  std::unordered_map<std::string_view, const GenerationBundle*> bundle_by_id;
  for (const auto& b : bundles) bundle_by_id.emplace(b.question_id, &b);
  std::unordered_map<std::string_view, const QuestionRecord*> question_by_id;
  for (const auto& q : questions) question_by_id.emplace(q.id, &q);

  // Sorted by id: std::set iteration merged across both sides.
  std::map<std::string, PartitionSide> sides;
  for (const auto& id : partition.high_ids) sides.emplace(id, PartitionSide::kHighEntropy);
  for (const auto& id : partition.low_ids) {
    if (!sides.emplace(id, PartitionSide::kLowEntropy).second) {
      throw ValidationError("partition: " + id + " is in both H and L");
    }
  }

  std::vector<SftRecord> rows;
  rows.reserve(sides.size());
  for (const auto& [id, side] : sides) {
    auto b = bundle_by_id.find(id);
    if (b == bundle_by_id.end()) throw ValidationError("emit_sft: no bundle for " + id);
    auto q = question_by_id.find(id);
    if (q == question_by_id.end()) throw ValidationError("emit_sft: no question record for " + id);

    SftRecord row;
    row.question_id = id;
    row.setting = setting;
    row.prompt = render_prompt(setting, q->second->question);
    row.question = q->second->question;
    row.partition = side;
    row.label = side == PartitionSide::kHighEntropy ? std::string(abstention_phrase)
                                                    : b->second->standard_response;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> threshold_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 9; ++k) grid.push_back(0.25 * k);
  return grid;
}

}  // namespace abstain
