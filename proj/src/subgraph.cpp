#include "lgcl/subgraph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "lgcl/error.hpp"
#include "lgcl/random.hpp"

namespace lgcl {

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "drnl") return FeatureMode::drnl;
  if (name == "degree") return FeatureMode::degree;
  if (name == "constant") return FeatureMode::constant;
  throw UsageError("unknown feature mode '" + std::string(name) + "' (expected drnl|degree|constant)");
}

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::drnl: return "drnl";
    case FeatureMode::degree: return "degree";
    case FeatureMode::constant: return "constant";
  }
  return "drnl";
}

EnclosingSubgraph extract_subgraph(const Graph& observed, Edge pair, unsigned hops,
                                   std::size_t node_budget, std::uint64_t seed) {
  if (hops < 1) throw UsageError("subgraph hop count must be >= 1");
  if (node_budget < 2) throw UsageError("subgraph node budget must be >= 2");
  if (pair.u == pair.v) throw DataError("target pair is a self-pair on node " + std::to_string(pair.u));
  if (pair.u >= observed.num_nodes() || pair.v >= observed.num_nodes()) {
    throw DataError("target pair (" + std::to_string(pair.u) + "," + std::to_string(pair.v) +
                    ") out of range");
  }

  const DistanceMap ball_a = shortest_path_within(observed, pair.u, hops);
  const DistanceMap ball_b = shortest_path_within(observed, pair.v, hops);
  std::vector<NodeId> others;
  others.reserve(ball_a.size() + ball_b.size());
  for (const auto& [v, d] : ball_a) {
    if (v != pair.u && v != pair.v) others.push_back(v);
  }
  for (const auto& [v, d] : ball_b) {
    if (v != pair.u && v != pair.v && !ball_a.contains(v)) others.push_back(v);
  }
  std::sort(others.begin(), others.end());

  if (others.size() + 2 > node_budget) {
    // Partial Fisher-Yates: the first `keep` slots become a uniform sample.
    const std::size_t keep = node_budget - 2;
    Rng rng(seed);
    for (std::size_t i = 0; i < keep; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(others.size() - i));
      std::swap(others[i], others[j]);
    }
    others.resize(keep);
    std::sort(others.begin(), others.end());
  }

  EnclosingSubgraph sg;
  sg.target_global = pair;
  sg.global_ids.reserve(others.size() + 2);
  sg.global_ids.push_back(pair.u);
  sg.global_ids.push_back(pair.v);
  sg.global_ids.insert(sg.global_ids.end(), others.begin(), others.end());

  // global -> local lookup over the sorted non-target block plus the two targets.
  auto local_of = [&](NodeId g) -> std::optional<NodeId> {
    if (g == pair.u) return 0;
    if (g == pair.v) return 1;
    auto it = std::lower_bound(others.begin(), others.end(), g);
    if (it == others.end() || *it != g) return std::nullopt;
    return static_cast<NodeId>(2 + (it - others.begin()));
  };

  std::vector<Edge> local_edges;
  for (NodeId lu = 0; lu < sg.global_ids.size(); ++lu) {
    for (NodeId gw : observed.neighbors(sg.global_ids[lu])) {
      auto lw = local_of(gw);
      if (!lw || *lw <= lu) continue;
      if (lu == 0 && *lw == 1) continue;  // target edge withheld
      local_edges.push_back({lu, *lw});
    }
  }
  sg.local_graph = Graph::from_edges(sg.global_ids.size(), local_edges);
  return sg;
}

std::uint32_t drnl_label(unsigned dist_a, unsigned dist_b) {
  if (dist_a == kUnreachable || dist_b == kUnreachable) return 0;
  if (dist_a == 0 || dist_b == 0) return 1;
  const unsigned d = dist_a + dist_b;
  const unsigned half = d / 2;
  return 1 + std::min(dist_a, dist_b) + half * (half + d % 2 - 1);
}

std::vector<std::uint32_t> label_nodes(const EnclosingSubgraph& sg) {
  const auto dist_a = bfs_distances(sg.local_graph, sg.target_a);
  const auto dist_b = bfs_distances(sg.local_graph, sg.target_b);
  std::vector<std::uint32_t> labels(sg.num_nodes());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = drnl_label(dist_a[v], dist_b[v]);
  labels[sg.target_a] = 1;
  labels[sg.target_b] = 1;
  return labels;
}

std::size_t feature_width(std::size_t max_label, FeatureMode mode) {
  return mode == FeatureMode::constant ? 1 : max_label + 1;
}

Tensor build_features(const EnclosingSubgraph& sg, std::size_t max_label, FeatureMode mode) {
  const std::size_t n = sg.num_nodes();
  Tensor x(n, feature_width(max_label, mode));
  for (std::size_t v = 0; v < n; ++v) {
    switch (mode) {
      case FeatureMode::constant:
        x(v, 0) = 1.0;
        break;
      case FeatureMode::degree:
        x(v, std::min(sg.local_graph.degree(static_cast<NodeId>(v)), max_label)) = 1.0;
        break;
      case FeatureMode::drnl:
        if (sg.labels.size() != n) throw std::logic_error("build_features: labels not computed");
        x(v, std::min<std::size_t>(sg.labels[v], max_label)) = 1.0;
        break;
    }
  }
  return x;
}

EnclosingSubgraph make_subgraph(const Graph& observed, Edge pair, const SubgraphOptions& opts,
                                std::uint64_t seed) {
  const Edge key = Edge::canonical(pair.u, pair.v);
  const std::uint64_t pair_seed = mix_seed(seed, (static_cast<std::uint64_t>(key.u) << 32) | key.v);
  EnclosingSubgraph sg = extract_subgraph(observed, pair, opts.hops, opts.node_budget, pair_seed);
  sg.labels = label_nodes(sg);
  sg.features = build_features(sg, opts.max_label, opts.features);
  return sg;
}

}  // namespace lgcl
