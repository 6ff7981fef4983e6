#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "lgcl/graph.hpp"
#include "lgcl/split.hpp"
#include "lgcl/tensor.hpp"

namespace lgcl {

enum class FeatureMode { drnl, degree, constant };

FeatureMode parse_feature_mode(std::string_view name);
std::string_view to_string(FeatureMode mode);

struct SubgraphOptions {
  unsigned hops = 2;
  std::size_t node_budget = 100;
  std::size_t max_label = 8;
  FeatureMode features = FeatureMode::drnl;
};

/// Local neighborhood around a query pair.
///
/// Local ids 0 and 1 are always the two target nodes (in the order given);
/// remaining nodes follow in ascending global id. The target edge is never
/// part of `local_graph`.
struct EnclosingSubgraph {
  Graph local_graph;
  std::vector<NodeId> global_ids;
  Edge target_global;
  NodeId target_a = 0;
  NodeId target_b = 1;
  std::vector<std::uint32_t> labels;
  Tensor features;

  std::size_t num_nodes() const { return global_ids.size(); }
};

/// Union of the <= `hops` balls around both targets over `observed`, capped at
/// `node_budget` nodes by seeded uniform subsampling of non-target nodes.
/// Labels and features are left empty.
EnclosingSubgraph extract_subgraph(const Graph& observed, Edge pair, unsigned hops,
                                   std::size_t node_budget, std::uint64_t seed);

inline EnclosingSubgraph extract_subgraph(const EdgeSplit& split, Edge pair, unsigned hops,
                                          std::size_t node_budget, std::uint64_t seed) {
  return extract_subgraph(split.observed, pair, hops, node_budget, seed);
}

/// Double-radius structural label from distances to both targets.
/// Targets get 1; nodes unreachable from either target get 0.
std::uint32_t drnl_label(unsigned dist_a, unsigned dist_b);

std::vector<std::uint32_t> label_nodes(const EnclosingSubgraph& sg);

/// One-hot rows over max_label+1 slots (slot 0 = unreachable), clamped at
/// max_label. Degree mode one-hots the clamped local degree instead; constant
/// mode emits a single all-ones column.
Tensor build_features(const EnclosingSubgraph& sg, std::size_t max_label,
                      FeatureMode mode = FeatureMode::drnl);

std::size_t feature_width(std::size_t max_label, FeatureMode mode);

/// extract + label + features in one call, with the per-pair seed derived
/// from (seed, pair) so results do not depend on extraction order.
EnclosingSubgraph make_subgraph(const Graph& observed, Edge pair, const SubgraphOptions& opts,
                                std::uint64_t seed);

}  // namespace lgcl
