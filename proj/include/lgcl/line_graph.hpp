#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lgcl/graph.hpp"
#include "lgcl/subgraph.hpp"
#include "lgcl/tensor.hpp"

namespace lgcl {

/// Line graph of an enclosing subgraph. Node k stands for the subgraph edge
/// `nodes[k]` (local ids); nodes are ordered lexicographically with the query
/// pair appended last at `target_index`, even though its edge is not in the
/// subgraph.
struct LineGraphView {
  std::vector<Edge> nodes;
  Graph adjacency;
  Tensor features;
  std::size_t target_index = 0;

  std::size_t num_nodes() const { return nodes.size(); }
};

/// Line-graph adjacency of an arbitrary edge list: node k = edges[k]; two
/// nodes are adjacent iff their edges share an endpoint. Built from a
/// per-endpoint incidence index in O(sum deg^2).
Graph line_graph_adjacency(std::size_t num_source_nodes, std::span<const Edge> edges);

/// Builds nodes, adjacency and, when the subgraph carries features, the lifted
/// feature matrix.
LineGraphView to_line_graph(const EnclosingSubgraph& sg);

/// Row k = concat(x_a, x_b) for nodes[k] = {a, b}, ordered by ascending
/// structural label, then ascending local id.
Tensor lift_features(const EnclosingSubgraph& sg, const LineGraphView& lg);

/// Closed-form line-graph edge count, (sum_v deg(v)^2)/2 - |E|, over the
/// subgraph's edges (plus the target edge when `include_target`).
std::uint64_t count_line_edges(const EnclosingSubgraph& sg, bool include_target);
std::uint64_t count_line_edges(std::size_t num_source_nodes, std::span<const Edge> edges);

}  // namespace lgcl
