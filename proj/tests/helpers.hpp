#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lgcl/graph.hpp"
#include "lgcl/random.hpp"

namespace testutil {

inline lgcl::Graph make_graph(std::size_t n, std::initializer_list<std::pair<int, int>> edges) {
  std::vector<lgcl::Edge> es;
  for (auto [a, b] : edges) es.push_back(lgcl::Edge::canonical(a, b));
  return lgcl::Graph::from_edges(n, es);
}

// G(n, p) with a seeded generator.
inline lgcl::Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  lgcl::Rng rng(seed);
  std::vector<lgcl::Edge> es;
  for (lgcl::NodeId u = 0; u < n; ++u) {
    for (lgcl::NodeId v = u + 1; v < n; ++v) {
      if (rng.uniform() < p) es.push_back({u, v});
    }
  }
  return lgcl::Graph::from_edges(n, es);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lgcl_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testutil
