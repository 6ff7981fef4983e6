#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lgcl/graph.hpp"

namespace lgcl {

/// Train/test partition of a graph's edges with 1:1 sampled non-edges.
///
/// `observed` holds only the training positives and is the graph every
/// subgraph is extracted from. All four pair lists are canonical (u < v) and
/// sorted ascending, so a split written to disk and read back is identical to
/// the in-memory one.
struct EdgeSplit {
  Graph observed;
  std::vector<Edge> train_pos;
  std::vector<Edge> train_neg;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
  double train_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Positive half of a split: which edges are observed and which are held out.
struct PositivePartition {
  std::vector<Edge> train;
  std::vector<Edge> test;
};

/// floor(fraction * |E|) seeded-shuffled edges go to training, the rest to test.
/// Requires 0 < fraction < 1 and both sides non-empty.
PositivePartition partition_edges(const Graph& g, double train_fraction, std::uint64_t seed);

/// Full split with uniform negative sampling over non-edges. Requires at least
/// 10 edges; throws DataError when the graph has too few non-edges.
EdgeSplit split_edges(const Graph& g, double train_fraction, std::uint64_t seed);

inline constexpr std::size_t kMinSplitEdges = 10;

/// Writes train_pos.txt, train_neg.txt, test_pos.txt, test_neg.txt and meta.txt.
void save_split(const std::filesystem::path& dir, const EdgeSplit& split);
EdgeSplit load_split(const std::filesystem::path& dir);

}  // namespace lgcl
