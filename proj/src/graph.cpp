#include "lgcl/graph.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "lgcl/error.hpp"

namespace lgcl {

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges) {
  Graph g;
  g.edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u == e.v) {
      throw DataError("self-loop on node " + std::to_string(e.u));
    }
    if (e.u >= num_nodes || e.v >= num_nodes) {
      throw DataError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) +
                      ") out of range for " + std::to_string(num_nodes) + " nodes");
    }
    g.edges_.push_back(Edge::canonical(e.u, e.v));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.offsets_.assign(num_nodes + 1, 0);
  for (const Edge& e : g.edges_) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) g.offsets_[i + 1] += g.offsets_[i];

  g.adjacency_.resize(2 * g.edges_.size());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : g.edges_) g.adjacency_[cursor[e.u]++] = e.v;
  for (const Edge& e : g.edges_) g.adjacency_[cursor[e.v]++] = e.u;
  for (std::size_t v = 0; v < num_nodes; ++v) {
    std::sort(g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
              g.adjacency_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]));
  }
  return g;
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  if (v >= num_nodes()) {
    throw std::out_of_range("node " + std::to_string(v) + " out of range (" +
                            std::to_string(num_nodes()) + " nodes)");
  }
  return {adjacency_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t Graph::max_degree() const {
  std::size_t best = 0;
  for (std::size_t v = 0; v < num_nodes(); ++v) best = std::max(best, offsets_[v + 1] - offsets_[v]);
  return best;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (a >= num_nodes() || b >= num_nodes()) return false;
  auto row = neighbors(a);
  return std::binary_search(row.begin(), row.end(), b);
}

std::optional<unsigned> DistanceMap::find(NodeId v) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), v,
                             [](const Entry& e, NodeId key) { return e.first < key; });
  if (it == entries_.end() || it->first != v) return std::nullopt;
  return it->second;
}

DistanceMap shortest_path_within(const Graph& g, NodeId source, unsigned cap) {
  if (source >= g.num_nodes()) {
    throw std::out_of_range("BFS source " + std::to_string(source) + " out of range");
  }
  std::unordered_map<NodeId, unsigned> seen{{source, 0}};
  std::vector<DistanceMap::Entry> out{{source, 0}};
  std::vector<NodeId> frontier{source};
  for (unsigned d = 1; d <= cap && !frontier.empty(); ++d) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId w : g.neighbors(u)) {
        if (seen.emplace(w, d).second) {
          next.push_back(w);
          out.emplace_back(w, d);
        }
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end());
  return DistanceMap(std::move(out));
}

std::vector<unsigned> bfs_distances(const Graph& g, NodeId source) {
  std::vector<unsigned> dist(g.num_nodes(), kUnreachable);
  if (source >= g.num_nodes()) {
    throw std::out_of_range("BFS source " + std::to_string(source) + " out of range");
  }
  std::deque<NodeId> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    NodeId u = queue.front();
    queue.pop_front();
    for (NodeId w : g.neighbors(u)) {
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Parses exactly two non-negative integers; returns false on anything else.
bool parse_pair(std::string_view line, std::uint64_t& a, std::uint64_t& b) {
  const char* p = line.data();
  const char* end = line.data() + line.size();
  auto skip_ws = [&] {
    while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
  };
  skip_ws();
  auto r1 = std::from_chars(p, end, a);
  if (r1.ec != std::errc{} || r1.ptr == p) return false;
  p = r1.ptr;
  if (p == end || (*p != ' ' && *p != '\t' && *p != ',')) return false;
  skip_ws();
  auto r2 = std::from_chars(p, end, b);
  if (r2.ec != std::errc{} || r2.ptr == p) return false;
  p = r2.ptr;
  skip_ws();
  return p == end;
}

template <class OnPair>
void scan_edge_file(const std::filesystem::path& path, OnPair&& on_pair) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = trim(line);
    if (body.empty() || body.front() == '#' || body.front() == '%') continue;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    if (!parse_pair(body, a, b)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected \"u v\", got \"" +
                      std::string(body) + "\"");
    }
    on_pair(a, b);
  }
}

}  // namespace

EdgeListFile load_edge_list(const std::filesystem::path& path) {
  EdgeListFile out;
  std::unordered_map<std::uint64_t, NodeId> compact;
  auto id_of = [&](std::uint64_t raw) {
    auto [it, inserted] = compact.emplace(raw, static_cast<NodeId>(out.original_ids.size()));
    if (inserted) out.original_ids.push_back(raw);
    return it->second;
  };
  std::vector<Edge> edges;
  scan_edge_file(path, [&](std::uint64_t a, std::uint64_t b) {
    NodeId u = id_of(a);
    NodeId v = id_of(b);
    if (u == v) {
      ++out.self_loops_dropped;
      return;
    }
    edges.push_back(Edge::canonical(u, v));
  });
  if (edges.empty()) throw DataError("edge list " + path.string() + " contains no edges");
  out.graph = Graph::from_edges(out.original_ids.size(), edges);
  out.duplicates_dropped = edges.size() - out.graph.num_edges();
  return out;
}

std::vector<Edge> read_pairs(const std::filesystem::path& path) {
  std::vector<Edge> edges;
  scan_edge_file(path, [&](std::uint64_t a, std::uint64_t b) {
    if (a > UINT32_MAX || b > UINT32_MAX) throw DataError(path.string() + ": node id overflow");
    edges.push_back(Edge::canonical(static_cast<NodeId>(a), static_cast<NodeId>(b)));
  });
  return edges;
}

void save_edge_list(const std::filesystem::path& path, std::span<const Edge> edges) {
  std::vector<Edge> sorted;
  sorted.reserve(edges.size());
  for (const Edge& e : edges) sorted.push_back(Edge::canonical(e.u, e.v));
  std::sort(sorted.begin(), sorted.end());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const Edge& e : sorted) out << e.u << ' ' << e.v << '\n';
}

void save_edge_list(const std::filesystem::path& path, const Graph& g) {
  save_edge_list(path, g.edges());
}

void save_id_map(const std::filesystem::path& path, std::span<const std::uint64_t> original_ids) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# compact original\n";
  for (std::size_t i = 0; i < original_ids.size(); ++i) out << i << ' ' << original_ids[i] << '\n';
}

}  // namespace lgcl
