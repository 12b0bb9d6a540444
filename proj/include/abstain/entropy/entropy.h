#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abstain/core/types.h"
#include "abstain/error.h"

namespace abstain {

/// Question-conditioned semantic equivalence R(s, s'). May throw; any
/// exception aborts clustering for the question.
using EquivalenceOracle =
    std::function<bool(std::string_view question, std::string_view a, std::string_view b)>;

/// Partition of a bundle's samples into equivalence classes. The
/// representative of each cluster is its first-assigned (lowest) index.
struct SemanticClustering {
  std::string question_id;
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> representatives;
  std::string backend_id;

  std::size_t sample_count() const;
  std::vector<std::size_t> cluster_sizes() const;
};

/// Raised when the oracle fails on a pair; carries both sample indices.
class OracleFailure : public Error {
 public:
  OracleFailure(std::size_t representative, std::size_t candidate, std::string a, std::string b,
                const std::string& cause);

  std::size_t representative() const { return representative_; }
  std::size_t candidate() const { return candidate_; }
  const std::string& representative_text() const { return a_; }
  const std::string& candidate_text() const { return b_; }

 private:
  std::size_t representative_;
  std::size_t candidate_;
  std::string a_;
  std::string b_;
};

/// -sum p ln p over outcome counts, in nats. Zero counts contribute nothing.
double entropy_from_counts(std::span<const std::size_t> counts);

/// Entropy of the exact-string outcome distribution, i.e. the count-based
/// estimator that ignores meaning. Throws ValidationError on an empty list.
double classical_entropy(std::span<const std::string> samples);

/// Greedy leader clustering in sample order. Exact duplicates are grouped
/// without consulting the oracle, and only still-unassigned samples can join
/// a leader's cluster.
SemanticClustering cluster_semantically(std::string_view question,
                                        std::span<const std::string> samples,
                                        const EquivalenceOracle& equivalent);

/// Discrete semantic entropy, -sum (|C|/M) ln(|C|/M).
double discrete_semantic_entropy(const SemanticClustering& clustering);

/// Throws ValidationError unless clusters partition {0..m-1} and every
/// representative lies in its own cluster.
void check_partition(const SemanticClustering& clustering, std::size_t m);

/// Classical and semantic entropy of a bundle's high-temperature samples.
/// The standard response does not take part.
EntropyScore score_bundle(const GenerationBundle& bundle, std::string_view question,
                          const EquivalenceOracle& equivalent, std::string backend_id);

}  // namespace abstain
