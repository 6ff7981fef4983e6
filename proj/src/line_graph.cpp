#include "lgcl/line_graph.hpp"

#include <algorithm>
#include <stdexcept>

namespace lgcl {

Graph line_graph_adjacency(std::size_t num_source_nodes, std::span<const Edge> edges) {
  std::vector<std::vector<NodeId>> incident(num_source_nodes);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    incident.at(edges[k].u).push_back(static_cast<NodeId>(k));
    incident.at(edges[k].v).push_back(static_cast<NodeId>(k));
  }
  std::vector<Edge> line_edges;
  for (const auto& list : incident) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) line_edges.push_back(Edge::canonical(list[i], list[j]));
    }
  }
  return Graph::from_edges(edges.size(), line_edges);
}

LineGraphView to_line_graph(const EnclosingSubgraph& sg) {
  LineGraphView lg;
  const auto sub_edges = sg.local_graph.edges();
  lg.nodes.assign(sub_edges.begin(), sub_edges.end());
  lg.nodes.push_back(Edge::canonical(sg.target_a, sg.target_b));
  lg.target_index = lg.nodes.size() - 1;
  lg.adjacency = line_graph_adjacency(sg.num_nodes(), lg.nodes);
  if (!sg.features.empty()) lg.features = lift_features(sg, lg);
  return lg;
}

Tensor lift_features(const EnclosingSubgraph& sg, const LineGraphView& lg) {
  const std::size_t width = sg.features.cols();
  Tensor out(lg.num_nodes(), 2 * width);
  auto label_of = [&](NodeId v) { return sg.labels.empty() ? 0u : sg.labels[v]; };
  for (std::size_t k = 0; k < lg.num_nodes(); ++k) {
    NodeId a = lg.nodes[k].u;
    NodeId b = lg.nodes[k].v;
    if (std::pair(label_of(b), b) < std::pair(label_of(a), a)) std::swap(a, b);
    auto dst = out.row(k);
    std::copy_n(sg.features.row(a).begin(), width, dst.begin());
    std::copy_n(sg.features.row(b).begin(), width, dst.begin() + static_cast<std::ptrdiff_t>(width));
  }
  return out;
}

std::uint64_t count_line_edges(std::size_t num_source_nodes, std::span<const Edge> edges) {
  std::vector<std::uint64_t> deg(num_source_nodes, 0);
  for (const Edge& e : edges) {
    ++deg.at(e.u);
    ++deg.at(e.v);
  }
  std::uint64_t sum_sq = 0;
  for (auto d : deg) sum_sq += d * d;
  // sum deg^2 has the parity of sum deg = 2|E|, so the halving is exact.
  return sum_sq / 2 - edges.size();
}

std::uint64_t count_line_edges(const EnclosingSubgraph& sg, bool include_target) {
  std::vector<Edge> edges(sg.local_graph.edges().begin(), sg.local_graph.edges().end());
  if (include_target) edges.push_back(Edge::canonical(sg.target_a, sg.target_b));
  return count_line_edges(sg.num_nodes(), edges);
}

}  // namespace lgcl
