#include "abstain/eval/evaluation.h"

#include <cmath>
#include <fmt/format.h>

#include "abstain/error.h"

namespace abstain {

void validate(const AedSummary& s) {
  if (s.total <= 0) throw ValidationError("aed summary: total must be positive");
  if (s.incorrect < 0 || s.correct < 0 || s.engaged != s.incorrect + s.correct ||
      s.engaged > s.total) {
    throw ValidationError("aed summary: counts violate Q = I + C <= |D|");
  }
  if (!(s.aed >= 0.0 && s.aed <= 1.0)) throw ValidationError("aed summary: aed outside [0, 1]");
}

void to_json(Json& j, const AedSummary& s) {
  j = Json{{"dataset_tag", s.dataset_tag},
           {"total", s.total},
           {"engaged", s.engaged},
           {"incorrect", s.incorrect},
           {"correct", s.correct},
           {"aed", s.aed},
           {"model_id", s.model_id},
           {"setting", s.setting},
           {"method", s.method},
           {"threshold", s.threshold ? Json(*s.threshold) : Json(nullptr)}};
}

void from_json(const Json& j, AedSummary& s) {
  j.at("dataset_tag").get_to(s.dataset_tag);
  j.at("total").get_to(s.total);
  j.at("engaged").get_to(s.engaged);
  j.at("incorrect").get_to(s.incorrect);
  j.at("correct").get_to(s.correct);
  j.at("aed").get_to(s.aed);
  s.model_id = j.value("model_id", "");
  s.setting = j.value("setting", "");
  s.method = j.value("method", "");
  if (j.contains("threshold") && !j["threshold"].is_null()) {
    s.threshold = j["threshold"].get<double>();
  } else {
    s.threshold.reset();
  }
}

double compute_aed(std::int64_t incorrect, std::int64_t correct, std::int64_t total) {
  if (total <= 0) throw ValidationError("compute_aed: |D| must be positive");
  if (incorrect < 0 || correct < 0 || incorrect + correct > total) {
    throw ValidationError("compute_aed: need I >= 0, C >= 0, I + C <= |D|");
  }
  const double i = static_cast<double>(incorrect);
  const double missing = static_cast<double>(total - correct);
  const double d = static_cast<double>(total);
  return std::sqrt((i * i + missing * missing) / (2.0 * d * d));
}

AedSummary tally(std::span<const EvalOutcome> outcomes, std::int64_t total) {
  if (total <= 0) throw ValidationError("tally: |D| must be positive");
  if (static_cast<std::int64_t>(outcomes.size()) > total) {
    throw ValidationError("tally: more outcomes than questions");
  }
  AedSummary s;
  s.total = total;
  for (const auto& o : outcomes) {
    if (o.abstained) continue;
    if (!o.correct) {
      throw ValidationError("tally: " + o.question_id + " answered but has no correctness verdict");
    }
    ++s.engaged;
    if (*o.correct) ++s.correct;
  }
  s.incorrect = s.engaged - s.correct;
  s.aed = compute_aed(s.incorrect, s.correct, total);
  return s;
}

double select_best_threshold(const std::map<double, double>& aed_by_threshold) {
  if (aed_by_threshold.empty()) throw ValidationError("select_best_threshold: no summaries");
  auto best = aed_by_threshold.begin();
  for (auto it = aed_by_threshold.begin(); it != aed_by_threshold.end(); ++it) {
    // Ascending iteration: <= lets a later (larger) threshold win ties.
    if (it->second <= best->second) best = it;
  }
  return best->first;
}

double select_best_threshold(const std::map<double, AedSummary>& summaries) {
  std::map<double, double> aed;
  for (const auto& [threshold, summary] : summaries) aed.emplace(threshold, summary.aed);
  return select_best_threshold(aed);
}

std::vector<AdaptationRow> adaptation_table(std::span<const AdaptationResult> results) {
  struct Sum {
    double incorrect = 0.0;
    double correct = 0.0;
    std::size_t n = 0;
  };
  std::map<std::pair<std::string, double>, Sum> groups;
  for (const auto& r : results) {
    auto& g = groups[{r.method, r.threshold}];
    g.incorrect += r.incorrect;
    g.correct += r.correct;
    ++g.n;
  }
  std::vector<AdaptationRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, g] : groups) {
    const double n = static_cast<double>(g.n);
    rows.push_back({key.first, key.second, g.incorrect / n, g.correct / n, g.n});
  }
  return rows;
}

namespace {

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

}  // namespace

std::string adaptation_csv(std::span<const AdaptationRow> rows) {
  std::string out = "method,threshold,mean_incorrect,mean_correct,n_runs\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{:.2f},{:.4f},{:.4f},{}\n", csv_field(r.method), r.threshold,
                       r.mean_incorrect, r.mean_correct, r.n_runs);
  }
  return out;
}

}  // namespace abstain
