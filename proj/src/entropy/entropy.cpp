#include "abstain/entropy/entropy.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace abstain {

OracleFailure::OracleFailure(std::size_t representative, std::size_t candidate, std::string a,
                             std::string b, const std::string& cause)
    : Error("equivalence check failed for samples " + std::to_string(representative) + " and " +
            std::to_string(candidate) + ": " + cause),
      representative_(representative),
      candidate_(candidate),
      a_(std::move(a)),
      b_(std::move(b)) {}

std::size_t SemanticClustering::sample_count() const {
  std::size_t total = 0;
  for (const auto& cluster : clusters) total += cluster.size();
  return total;
}

std::vector<std::size_t> SemanticClustering::cluster_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(clusters.size());
  for (const auto& cluster : clusters) sizes.push_back(cluster.size());
  return sizes;
}

double entropy_from_counts(std::span<const std::size_t> counts) {
  // Evaluated as ln M - (1/M) sum c ln c over sorted counts: equal multisets
  // give bit-identical results and the all-singleton case is exactly ln M.
  std::vector<std::size_t> sorted(counts.begin(), counts.end());
  std::erase(sorted, 0);
  if (sorted.empty()) throw ValidationError("entropy of an empty distribution");
  std::sort(sorted.begin(), sorted.end());
  const std::size_t total = std::accumulate(sorted.begin(), sorted.end(), std::size_t{0});
  if (sorted.size() == 1) return 0.0;

  const double m = static_cast<double>(total);
  double weighted = 0.0;
  for (std::size_t c : sorted) {
    const double x = static_cast<double>(c);
    weighted += x * std::log(x);
  }
  const double log_m = std::log(m);
  return std::clamp(log_m - weighted / m, 0.0, log_m);
}

double classical_entropy(std::span<const std::string> samples) {
  if (samples.empty()) throw ValidationError("classical_entropy: empty sample list");
  std::unordered_map<std::string_view, std::size_t> counts;
  for (const auto& s : samples) ++counts[s];
  std::vector<std::size_t> values;
  values.reserve(counts.size());
  for (const auto& [text, count] : counts) values.push_back(count);
  return entropy_from_counts(values);
}

SemanticClustering cluster_semantically(std::string_view question,
                                        std::span<const std::string> samples,
                                        const EquivalenceOracle& equivalent) {
  if (samples.empty()) throw ValidationError("cluster_semantically: empty sample list");

  // Group exact duplicates first; `distinct` holds first occurrences in order.
  std::unordered_map<std::string_view, std::size_t> first_index;
  std::vector<std::size_t> distinct;
  std::vector<std::vector<std::size_t>> members(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] = first_index.try_emplace(samples[i], i);
    if (inserted) distinct.push_back(i);
    members[it->second].push_back(i);
  }

  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> assignment(distinct.size(), kUnassigned);
  SemanticClustering result;

  for (std::size_t a = 0; a < distinct.size(); ++a) {
    if (assignment[a] != kUnassigned) continue;
    const std::size_t cluster_id = result.clusters.size();
    const std::size_t leader = distinct[a];
    assignment[a] = cluster_id;
    result.representatives.push_back(leader);
    for (std::size_t b = a + 1; b < distinct.size(); ++b) {
      if (assignment[b] != kUnassigned) continue;
      const std::size_t candidate = distinct[b];
      bool same = false;
      try {
        same = equivalent(question, samples[leader], samples[candidate]);
      } catch (const std::exception& e) {
        throw OracleFailure(leader, candidate, samples[leader], samples[candidate], e.what());
      }
      if (same) assignment[b] = cluster_id;
    }
    result.clusters.emplace_back();
  }

  for (std::size_t a = 0; a < distinct.size(); ++a) {
    auto& cluster = result.clusters[assignment[a]];
    const auto& dup = members[distinct[a]];
    cluster.insert(cluster.end(), dup.begin(), dup.end());
  }
  for (auto& cluster : result.clusters) std::sort(cluster.begin(), cluster.end());
  return result;
}

double discrete_semantic_entropy(const SemanticClustering& clustering) {
  if (clustering.clusters.empty()) throw ValidationError("discrete_semantic_entropy: empty clustering");
  return entropy_from_counts(clustering.cluster_sizes());
}

void check_partition(const SemanticClustering& clustering, std::size_t m) {
  if (clustering.representatives.size() != clustering.clusters.size()) {
    throw ValidationError("clustering: one representative per cluster required");
  }
  std::vector<bool> covered(m, false);
  for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
    const auto& cluster = clustering.clusters[c];
    if (cluster.empty()) throw ValidationError("clustering: empty cluster");
    for (std::size_t index : cluster) {
      if (index >= m) throw ValidationError("clustering: index out of range");
      if (covered[index]) throw ValidationError("clustering: index in two clusters");
      covered[index] = true;
    }
    if (std::find(cluster.begin(), cluster.end(), clustering.representatives[c]) == cluster.end()) {
      throw ValidationError("clustering: representative outside its cluster");
    }
  }
  if (std::find(covered.begin(), covered.end(), false) != covered.end()) {
    throw ValidationError("clustering: indices not covered");
  }
}

EntropyScore score_bundle(const GenerationBundle& bundle, std::string_view question,
                          const EquivalenceOracle& equivalent, std::string backend_id) {
  auto clustering = cluster_semantically(question, bundle.samples, equivalent);
  clustering.question_id = bundle.question_id;
  clustering.backend_id = backend_id;
  check_partition(clustering, bundle.samples.size());

  EntropyScore score;
  score.question_id = bundle.question_id;
  score.classical_entropy = classical_entropy(bundle.samples);
  score.semantic_entropy = discrete_semantic_entropy(clustering);
  score.backend_id = std::move(backend_id);
  score.m = bundle.samples.size();
  return score;
}

}  // namespace abstain
