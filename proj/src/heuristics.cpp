#include "lgcl/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "lgcl/error.hpp"

namespace lgcl {

std::vector<double> katz_scores(const Graph& g, std::span<const Edge> pairs, const KatzOptions& opts) {
  if (opts.max_path_len < 1) throw UsageError("katz: max_path_len must be >= 1");
  if (!(opts.attenuation > 0.0)) throw UsageError("katz: attenuation must be > 0");
  const double maxdeg = static_cast<double>(std::max<std::size_t>(g.max_degree(), 1));
  if (opts.attenuation >= 1.0 / maxdeg) {
    throw UsageError("katz: attenuation " + std::to_string(opts.attenuation) + " must be below 1/max_degree = " +
                     std::to_string(1.0 / maxdeg));
  }
  const std::size_t n = g.num_nodes();
  for (const Edge& e : pairs) {
    if (e.u >= n || e.v >= n) throw DataError("katz: pair outside the graph");
  }
  // group pairs by source so each walk expansion is shared
  std::map<NodeId, std::vector<std::size_t>> by_source;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_source[pairs[i].u].push_back(i);

  std::vector<double> scores(pairs.size(), 0.0);
  std::vector<double> walks(n), next(n);
  for (const auto& [src, idx] : by_source) {
    std::fill(walks.begin(), walks.end(), 0.0);
    walks[src] = 1.0;
    double weight = 1.0;
    for (std::size_t l = 1; l <= opts.max_path_len; ++l) {
      std::fill(next.begin(), next.end(), 0.0);
      for (NodeId v = 0; v < n; ++v) {
        if (walks[v] == 0.0) continue;
        for (NodeId w : g.neighbors(v)) next[w] += walks[v];
      }
      walks.swap(next);
      weight *= opts.attenuation;
      for (std::size_t i : idx) scores[i] += weight * walks[pairs[i].v];
    }
  }
  return scores;
}

std::vector<double> rooted_pagerank(const Graph& g, NodeId source, const RootedPageRankOptions& opts) {
  if (!(opts.restart > 0.0 && opts.restart <= 1.0)) throw UsageError("rooted pagerank: restart must lie in (0, 1]");
  const std::size_t n = g.num_nodes();
  if (source >= n) throw DataError("rooted pagerank: source outside the graph");
  std::vector<double> pi(n, 0.0), next(n);
  pi[source] = 1.0;
  const double walk = 1.0 - opts.restart;
  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    double stranded = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      if (pi[v] == 0.0) continue;
      const auto nb = g.neighbors(v);
      if (nb.empty()) {
        stranded += pi[v];
        continue;
      }
      const double share = walk * pi[v] / static_cast<double>(nb.size());
      for (NodeId w : nb) next[w] += share;
    }
    next[source] += opts.restart + walk * stranded;
    double change = 0.0;
    for (std::size_t v = 0; v < n; ++v) change += std::fabs(next[v] - pi[v]);
    pi.swap(next);
    if (change < opts.tolerance) break;
  }
  return pi;
}

std::vector<double> rooted_pagerank_scores(const Graph& g, std::span<const Edge> pairs,
                                           const RootedPageRankOptions& opts, std::size_t jobs) {
  const std::size_t n = g.num_nodes();
  for (const Edge& e : pairs) {
    if (e.u >= n || e.v >= n) throw DataError("rooted pagerank: pair outside the graph");
  }
  // (source, pair index, target) requests, one per direction
  std::map<NodeId, std::vector<std::pair<std::size_t, NodeId>>> requests;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    requests[pairs[i].u].emplace_back(i, pairs[i].v);
    requests[pairs[i].v].emplace_back(i, pairs[i].u);
  }
  std::vector<NodeId> sources;
  for (const auto& [s, r] : requests) sources.push_back(s);

  // each pair gets exactly two contributions, stored separately so the final
  // sum does not depend on thread scheduling
  std::vector<double> forward(pairs.size(), 0.0), backward(pairs.size(), 0.0);
  auto work = [&](std::size_t t, std::size_t stride) {
    for (std::size_t k = t; k < sources.size(); k += stride) {
      const NodeId s = sources[k];
      const auto pi = rooted_pagerank(g, s, opts);
      for (const auto& [i, target] : requests.at(s)) {
        (pairs[i].u == s ? forward : backward)[i] = pi[target];
      }
    }
  };
  jobs = std::max<std::size_t>(jobs, 1);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
  }
  std::vector<double> scores(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) scores[i] = 0.5 * (forward[i] + backward[i]);
  return scores;
}

}  // namespace lgcl
