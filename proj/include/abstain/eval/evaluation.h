#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "abstain/core/types.h"

namespace abstain {

/// Counts for one evaluated (model, dataset, setting): engaged = incorrect +
/// correct <= total. Optional method/threshold label sweep runs.
struct AedSummary {
  std::string dataset_tag;
  std::int64_t total = 0;
  std::int64_t engaged = 0;
  std::int64_t incorrect = 0;
  std::int64_t correct = 0;
  double aed = 0.0;
  std::string model_id;
  std::string setting;
  std::string method;
  std::optional<double> threshold;

  bool operator==(const AedSummary&) const = default;
};

void validate(const AedSummary& summary);
inline std::optional<std::string> record_key(const AedSummary&) { return std::nullopt; }
void to_json(Json& j, const AedSummary& s);
void from_json(const Json& j, AedSummary& s);

/// Normalised distance from (incorrect, correct) to the ideal point
/// (0, total): sqrt((I^2 + (D - C)^2) / (2 D^2)). Lower is better.
double compute_aed(std::int64_t incorrect, std::int64_t correct, std::int64_t total);

/// Aggregates outcomes: Q = non-abstained, C = correct, I = Q - C.
AedSummary tally(std::span<const EvalOutcome> outcomes, std::int64_t total);

/// Threshold with the lowest AED; ties go to the larger threshold.
double select_best_threshold(const std::map<double, AedSummary>& summaries);
double select_best_threshold(const std::map<double, double>& aed_by_threshold);

struct AdaptationResult {
  std::string method;
  double threshold = 0.0;
  std::string dataset;
  double incorrect = 0.0;
  double correct = 0.0;
};

struct AdaptationRow {
  std::string method;
  double threshold = 0.0;
  double mean_incorrect = 0.0;
  double mean_correct = 0.0;
  std::size_t n_runs = 0;

  bool operator==(const AdaptationRow&) const = default;
};

/// One row per (method, threshold), averaging I and C across runs, sorted by
/// method then threshold.
std::vector<AdaptationRow> adaptation_table(std::span<const AdaptationResult> results);

/// CSV with header method,threshold,mean_incorrect,mean_correct,n_runs.
std::string adaptation_csv(std::span<const AdaptationRow> rows);

}  // namespace abstain
