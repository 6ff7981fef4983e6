#include <numeric>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "lgcl/error.hpp"
#include "lgcl/subgraph.hpp"

using namespace lgcl;
using testutil::make_graph;

namespace {

std::set<NodeId> node_set(const EnclosingSubgraph& sg) { return {sg.global_ids.begin(), sg.global_ids.end()}; }

std::set<Edge> global_edges(const EnclosingSubgraph& sg) {
  std::set<Edge> out;
  for (const Edge& e : sg.local_graph.edges()) out.insert(Edge::canonical(sg.global_ids[e.u], sg.global_ids[e.v]));
  return out;
}

}  // namespace

TEST_CASE("extract_subgraph: path, pair (1,3), h=1") {
  auto g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  auto sg = extract_subgraph(g, {1, 3}, 1, 100, 1);
  CHECK(node_set(sg) == std::set<NodeId>{0, 1, 2, 3, 4});
  CHECK(global_edges(sg) == std::set<Edge>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  CHECK(sg.global_ids[0] == 1);
  CHECK(sg.global_ids[1] == 3);
}

TEST_CASE("extract_subgraph: triangle drops the target edge") {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  auto sg = extract_subgraph(g, {0, 1}, 1, 100, 1);
  CHECK(node_set(sg) == std::set<NodeId>{0, 1, 2});
  CHECK(global_edges(sg) == std::set<Edge>{{0, 2}, {1, 2}});
  CHECK_FALSE(sg.local_graph.has_edge(sg.target_a, sg.target_b));
}

TEST_CASE("extract_subgraph: star with node budget") {
  std::vector<Edge> es;
  for (NodeId leaf = 1; leaf <= 100; ++leaf) es.push_back({0, leaf});
  auto g = Graph::from_edges(101, es);
  auto sg = extract_subgraph(g, {0, 17}, 1, 20, 3);
  CHECK(sg.num_nodes() == 20);
  CHECK(sg.global_ids[0] == 0);
  CHECK(sg.global_ids[1] == 17);
  auto again = extract_subgraph(g, {0, 17}, 1, 20, 3);
  CHECK(again.global_ids == sg.global_ids);
  auto other = extract_subgraph(g, {0, 17}, 1, 20, 4);
  CHECK(other.num_nodes() == 20);
}

TEST_CASE("extract_subgraph: isolated targets and errors") {
  auto g = make_graph(4, {{0, 1}});
  auto sg = extract_subgraph(g, {2, 3}, 2, 100, 1);
  CHECK(sg.num_nodes() == 2);
  CHECK(sg.local_graph.num_edges() == 0);
  CHECK_THROWS_AS(extract_subgraph(g, {2, 2}, 1, 100, 1), DataError);
  CHECK_THROWS_AS(extract_subgraph(g, {0, 9}, 1, 100, 1), DataError);
  CHECK_THROWS_AS(extract_subgraph(g, {0, 1}, 0, 100, 1), UsageError);
  CHECK_THROWS_AS(extract_subgraph(g, {0, 1}, 1, 1, 1), UsageError);
}

TEST_CASE("extract_subgraph matches brute-force h-hop balls") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto g = testutil::random_graph(25, 0.12, seed);
    Rng rng(seed);
    for (int t = 0; t < 5; ++t) {
      const auto a = static_cast<NodeId>(rng.uniform_index(25));
      const auto b = static_cast<NodeId>((a + 1 + rng.uniform_index(24)) % 25);
      const unsigned h = 1 + static_cast<unsigned>(rng.uniform_index(2));
      auto sg = extract_subgraph(g, {a, b}, h, 1000, seed);
      const auto da = bfs_distances(g, a), db = bfs_distances(g, b);
      std::set<NodeId> expect;
      for (NodeId v = 0; v < 25; ++v) {
        if (std::min(da[v], db[v]) <= h) expect.insert(v);
      }
      CHECK(node_set(sg) == expect);
      // induced edges minus the target
      std::set<Edge> induced;
      for (const Edge& e : g.edges()) {
        if (expect.count(e.u) && expect.count(e.v) && !(e == Edge::canonical(a, b))) induced.insert(e);
      }
      CHECK(global_edges(sg) == induced);
      // non-target nodes appear in ascending global id
      CHECK(std::is_sorted(sg.global_ids.begin() + 2, sg.global_ids.end()));
    }
  }
}

TEST_CASE("drnl_label values") {
  CHECK(drnl_label(0, 0) == 1);
  CHECK(drnl_label(1, 1) == 2);
  CHECK(drnl_label(1, 2) == 3);
  CHECK(drnl_label(2, 1) == 3);
  CHECK(drnl_label(2, 2) == 5);
  CHECK(drnl_label(1, 3) == 4);
  CHECK(drnl_label(2, 3) == 7);
  CHECK(drnl_label(kUnreachable, 1) == 0);
}

TEST_CASE("label_nodes: targets get 1, common neighbor 2, unreachable 0") {
  // 0-2-1 common neighbor, 3 attached to 2, 4 isolated from both targets in the subgraph
  auto g = make_graph(6, {{0, 2}, {1, 2}, {2, 3}, {0, 1}, {4, 5}, {3, 4}});
  auto sg = make_subgraph(g, {0, 1}, {2, 100, 8, FeatureMode::drnl}, 1);
  CHECK(sg.labels[0] == 1);
  CHECK(sg.labels[1] == 1);
  for (std::size_t i = 2; i < sg.num_nodes(); ++i) {
    const NodeId gid = sg.global_ids[i];
    if (gid == 2) CHECK(sg.labels[i] == 2);
    if (gid == 3) CHECK(sg.labels[i] == 5);  // d = (2,2)
  }
  // a node connected only through the target edge becomes unreachable after removal
  auto h = make_graph(4, {{0, 1}, {2, 3}, {1, 2}});
  auto sh = extract_subgraph(h, {0, 1}, 1, 100, 1);
  CHECK(sh.num_nodes() == 3);
  auto labels = label_nodes(sh);
  CHECK(labels[2] == drnl_label(kUnreachable, 1));
}

TEST_CASE("build_features: one-hot rows, clamping, widths") {
  auto g = testutil::random_graph(30, 0.15, 5);
  auto sg = make_subgraph(g, {0, 1}, {2, 100, 3, FeatureMode::drnl}, 1);
  CHECK(sg.features.cols() == 4);
  CHECK(feature_width(3, FeatureMode::drnl) == 4);
  for (std::size_t r = 0; r < sg.features.rows(); ++r) {
    auto row = sg.features.row(r);
    CHECK(std::accumulate(row.begin(), row.end(), 0.0) == 1.0);
    const std::size_t slot = std::min<std::size_t>(sg.labels[r], 3);
    CHECK(row[slot] == 1.0);
  }
  CHECK(sg.features(0, 1) == 1.0);

  auto deg = build_features(sg, 3, FeatureMode::degree);
  CHECK(deg.cols() == 4);
  for (std::size_t r = 0; r < deg.rows(); ++r) {
    CHECK(deg(r, std::min<std::size_t>(sg.local_graph.degree(static_cast<NodeId>(r)), 3)) == 1.0);
  }
  auto cst = build_features(sg, 3, FeatureMode::constant);
  CHECK(cst.cols() == 1);
  CHECK(feature_width(8, FeatureMode::constant) == 1);
}

TEST_CASE("parse_feature_mode") {
  CHECK(parse_feature_mode("drnl") == FeatureMode::drnl);
  CHECK(parse_feature_mode("degree") == FeatureMode::degree);
  CHECK(parse_feature_mode("constant") == FeatureMode::constant);
  CHECK_THROWS_AS(parse_feature_mode("onehot"), UsageError);
  CHECK(to_string(FeatureMode::degree) == "degree");
}
