#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lgcl/graph.hpp"

namespace lgcl {

struct KatzOptions {
  double attenuation = 0.01;
  std::size_t max_path_len = 5;
};

/// Truncated Katz index: sum over l = 1..L of attenuation^l times the number
/// of walks of length l between the pair. Throws UsageError when
/// attenuation >= 1 / max_degree or max_path_len < 1.
std::vector<double> katz_scores(const Graph& g, std::span<const Edge> pairs, const KatzOptions& opts = {});

struct RootedPageRankOptions {
  double restart = 0.15;
  std::size_t max_iters = 1000;
  double tolerance = 1e-9;  // L1 change between iterates
};

/// Stationary distribution of the walk that restarts at `source` with
/// probability `restart` each step. Walkers at isolated nodes jump back to
/// the source.
std::vector<double> rooted_pagerank(const Graph& g, NodeId source, const RootedPageRankOptions& opts = {});

/// score(u, v) = (pi_u[v] + pi_v[u]) / 2.
std::vector<double> rooted_pagerank_scores(const Graph& g, std::span<const Edge> pairs,
                                           const RootedPageRankOptions& opts = {}, std::size_t jobs = 1);

}  // namespace lgcl
