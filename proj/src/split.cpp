#include "lgcl/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <unordered_set>

#include "lgcl/error.hpp"
#include "lgcl/random.hpp"

namespace lgcl {

namespace {

std::uint64_t pair_key(const Edge& e) { return (static_cast<std::uint64_t>(e.u) << 32) | e.v; }

// Draws `count` distinct non-edges not already in `taken`, inserting them.
std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, Rng& rng,
                                   std::unordered_set<std::uint64_t>& taken) {
  const std::uint64_t n = g.num_nodes();
  const std::uint64_t all_pairs = n * (n - 1) / 2;
  const std::uint64_t available = all_pairs - g.num_edges() - taken.size();
  if (count > available) {
    throw DataError("not enough non-edges to sample " + std::to_string(count) + " negatives (" +
                    std::to_string(available) + " available)");
  }
  std::vector<Edge> out;
  out.reserve(count);
  if (count * 2 > available) {
    // Dense graph: enumerate and take a seeded prefix of a shuffle.
    std::vector<Edge> pool;
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = u + 1; v < n; ++v) {
        Edge e{u, v};
        if (!g.has_edge(u, v) && !taken.contains(pair_key(e))) pool.push_back(e);
      }
    }
    rng.shuffle(std::span<Edge>(pool));
    pool.resize(count);
    for (const Edge& e : pool) taken.insert(pair_key(e));
    return pool;
  }
  while (out.size() < count) {
    auto a = static_cast<NodeId>(rng.uniform_index(n));
    auto b = static_cast<NodeId>(rng.uniform_index(n));
    if (a == b) continue;
    Edge e = Edge::canonical(a, b);
    if (g.has_edge(e.u, e.v) || !taken.insert(pair_key(e)).second) continue;
    out.push_back(e);
  }
  return out;
}

std::map<std::string, std::string> read_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open split metadata " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("malformed metadata line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

PositivePartition partition_edges(const Graph& g, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train fraction must lie in (0,1), got " + std::to_string(train_fraction));
  }
  const std::size_t m = g.num_edges();
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(m)));
  if (n_train == 0 || n_train == m) {
    throw DataError("fraction " + std::to_string(train_fraction) + " of " + std::to_string(m) +
                    " edges leaves an empty train or test side");
  }
  std::vector<Edge> edges(g.edges().begin(), g.edges().end());
  Rng rng(seed);
  rng.shuffle(std::span<Edge>(edges));
  PositivePartition out;
  out.train.assign(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test.assign(edges.begin() + static_cast<std::ptrdiff_t>(n_train), edges.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

EdgeSplit split_edges(const Graph& g, double train_fraction, std::uint64_t seed) {
  if (g.num_edges() < kMinSplitEdges) {
    throw DataError("graph has " + std::to_string(g.num_edges()) + " edges; splitting needs at least " +
                    std::to_string(kMinSplitEdges));
  }
  auto positives = partition_edges(g, train_fraction, seed);

  EdgeSplit split;
  split.train_fraction = train_fraction;
  split.seed = seed;
  // Negatives use a derived stream so the positive partition does not depend on them.
  Rng rng(mix_seed(seed, 0x6e6567));
  std::unordered_set<std::uint64_t> taken;
  split.train_neg = sample_non_edges(g, positives.train.size(), rng, taken);
  split.test_neg = sample_non_edges(g, positives.test.size(), rng, taken);
  std::sort(split.train_neg.begin(), split.train_neg.end());
  std::sort(split.test_neg.begin(), split.test_neg.end());
  split.observed = Graph::from_edges(g.num_nodes(), positives.train);
  split.train_pos = std::move(positives.train);
  split.test_pos = std::move(positives.test);
  return split;
}

void save_split(const std::filesystem::path& dir, const EdgeSplit& split) {
  std::filesystem::create_directories(dir);
  save_edge_list(dir / "train_pos.txt", split.train_pos);
  save_edge_list(dir / "train_neg.txt", split.train_neg);
  save_edge_list(dir / "test_pos.txt", split.test_pos);
  save_edge_list(dir / "test_neg.txt", split.test_neg);
  std::ofstream meta(dir / "meta.txt");
  if (!meta) throw DataError("cannot write split metadata in " + dir.string());
  char fraction[64];
  std::snprintf(fraction, sizeof fraction, "%.17g", split.train_fraction);
  meta << "num_nodes=" << split.observed.num_nodes() << '\n'
       << "train_fraction=" << fraction << '\n'
       << "seed=" << split.seed << '\n'
       << "train_pos=" << split.train_pos.size() << '\n'
       << "train_neg=" << split.train_neg.size() << '\n'
       << "test_pos=" << split.test_pos.size() << '\n'
       << "test_neg=" << split.test_neg.size() << '\n';
}

EdgeSplit load_split(const std::filesystem::path& dir) {
  auto meta = read_meta(dir / "meta.txt");
  auto field = [&](const std::string& key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw DataError("split metadata missing '" + key + "'");
    return it->second;
  };
  EdgeSplit split;
  const std::size_t num_nodes = std::stoull(field("num_nodes"));
  split.train_fraction = std::stod(field("train_fraction"));
  split.seed = std::stoull(field("seed"));
  split.train_pos = read_pairs(dir / "train_pos.txt");
  split.train_neg = read_pairs(dir / "train_neg.txt");
  split.test_pos = read_pairs(dir / "test_pos.txt");
  split.test_neg = read_pairs(dir / "test_neg.txt");
  for (auto* list : {&split.train_pos, &split.train_neg, &split.test_pos, &split.test_neg}) {
    std::sort(list->begin(), list->end());
  }
  auto check_count = [&](const std::string& key, std::size_t got) {
    if (std::stoull(field(key)) != got) {
      throw DataError("split file " + key + " has " + std::to_string(got) + " pairs, metadata says " +
                      field(key));
    }
  };
  check_count("train_pos", split.train_pos.size());
  check_count("train_neg", split.train_neg.size());
  check_count("test_pos", split.test_pos.size());
  check_count("test_neg", split.test_neg.size());
  split.observed = Graph::from_edges(num_nodes, split.train_pos);
  return split;
}

}  // namespace lgcl
