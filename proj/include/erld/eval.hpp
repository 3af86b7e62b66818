#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "erld/components.hpp"
#include "erld/datagen.hpp"
#include "erld/document.hpp"
#include "erld/pipeline.hpp"
#include "json.hpp"

namespace erld {

struct Metrics {
  double precision = 1.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t true_pairs = 0;
  std::uint64_t predicted_pairs = 0;
  std::uint64_t correct_pairs = 0;
  std::uint64_t match_evaluations = 0;
  double wall_time = 0.0;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Pairwise precision/recall/F1. With no predicted pairs precision is 1.0.
/// Throws InputError if `predicted` does not cover exactly the gold ids.
[[nodiscard]] Metrics pairwise_metrics(const Partition& predicted, const GoldStandard& gold);

[[nodiscard]] Partition partition_of(const std::vector<Entity>& entities);

/// Reads entity JSON lines; only "members" is required.
[[nodiscard]] Partition read_entity_partition(std::istream& in);

struct BaselineResult {
  std::vector<Entity> entities;
  std::uint64_t match_evaluations = 0;
  double seconds = 0.0;
};

/// Every document pair through the match function, then connected components.
/// Traversal sets are computed as in the pipeline so traversal predicates work.
[[nodiscard]] BaselineResult allpairs_baseline(const std::vector<Document>& docs,
                                               const ResolverConfig& cfg);

struct BenefitReport {
  Metrics with_traversal;
  Metrics without_traversal;
  double recall_gain = 0.0;
  double precision_change = 0.0;
  /// Recall with traversal >= recall without, and precision dropped by at most epsilon.
  bool holds = false;

  [[nodiscard]] nlohmann::json to_json() const;
};

[[nodiscard]] BenefitReport run_benefit_experiment(const std::vector<Document>& docs,
                                                   const GoldStandard& gold,
                                                   const ResolverConfig& with_traversal,
                                                   const ResolverConfig& without_traversal,
                                                   double epsilon = 0.005);

}  // namespace erld
