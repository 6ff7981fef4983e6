#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace lgcl {

using NodeId = std::uint32_t;

/// Undirected edge in canonical form (u < v).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Immutable undirected, unweighted graph in compressed adjacency form.
///
/// Invariants: no self-loops, no duplicate edges, neighbor rows sorted
/// ascending, every edge stored once as (u < v) in `edges()`.
class Graph {
 public:
  Graph() = default;

  /// Builds from arbitrary-order pairs; reversed duplicates collapse into one
  /// edge. Self-loops and out-of-range endpoints throw DataError.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges);

  std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }

  /// Sorted neighbor row. Throws std::out_of_range for an invalid id.
  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  std::size_t max_degree() const;
  bool has_edge(NodeId a, NodeId b) const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> adjacency_;
  std::vector<Edge> edges_;
};

/// Hop distances from a BFS source, keyed by node id (ascending).
class DistanceMap {
 public:
  using Entry = std::pair<NodeId, unsigned>;

  explicit DistanceMap(std::vector<Entry> sorted_entries) : entries_(std::move(sorted_entries)) {}

  std::size_t size() const { return entries_.size(); }
  std::optional<unsigned> find(NodeId v) const;
  bool contains(NodeId v) const { return find(v).has_value(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<Entry> entries_;
};

/// BFS truncated at `cap` hops; the source maps to 0.
DistanceMap shortest_path_within(const Graph& g, NodeId source, unsigned cap);

/// Unbounded BFS distances, UINT_MAX for unreachable nodes.
std::vector<unsigned> bfs_distances(const Graph& g, NodeId source);

inline constexpr unsigned kUnreachable = ~0u;

struct EdgeListFile {
  Graph graph;
  /// original_ids[compact id] = id as written in the file.
  std::vector<std::uint64_t> original_ids;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

/// Reads "u v" lines ('#' comments and blank lines skipped). Node ids are
/// compacted to 0..n-1 in first-appearance order.
EdgeListFile load_edge_list(const std::filesystem::path& path);

/// Reads an edge list whose ids are already compact, without relabeling.
std::vector<Edge> read_pairs(const std::filesystem::path& path);

/// Writes canonical "u v" lines, u < v, ascending.
void save_edge_list(const std::filesystem::path& path, std::span<const Edge> edges);
void save_edge_list(const std::filesystem::path& path, const Graph& g);

/// Writes "compact original" lines for every node.
void save_id_map(const std::filesystem::path& path, std::span<const std::uint64_t> original_ids);

}  // namespace lgcl
