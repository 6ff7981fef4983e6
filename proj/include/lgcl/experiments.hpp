#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lgcl/config.hpp"
#include "lgcl/graph.hpp"
#include "lgcl/heuristics.hpp"
#include "lgcl/model.hpp"
#include "lgcl/split.hpp"
#include "lgcl/trainer.hpp"

namespace lgcl {

enum class Head { subgraph, linegraph, fused };
Head parse_head(std::string_view name);
std::string_view to_string(Head head);

struct MetricReport {
  std::string method;
  std::string dataset;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  double auc = 0.0;
  double ap = 0.0;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double wall_seconds = 0.0;
  std::string config_hash;
};

struct ScoredPairs {
  std::vector<Edge> pairs;
  std::vector<double> scores;
  std::vector<int> labels;
};

/// Sigmoid scores of the selected head on test_pos and test_neg (fused = mean
/// of both heads' probabilities).
ScoredPairs score_test_pairs(const ModelParams& params, const LGCLConfig& cfg, const EdgeSplit& split, Head head);

MetricReport evaluate_model(const ModelParams& params, const LGCLConfig& cfg, const EdgeSplit& split, Head head);

/// Ablation variants: "lgcl", "sg-only" (alpha 0, beta 0), "lg-only"
/// (alpha 1, beta 0), "sg+lg" (beta 0).
inline constexpr std::string_view kMethods[] = {"sg-only", "lg-only", "sg+lg", "lgcl"};
LGCLConfig method_config(const LGCLConfig& base, std::string_view method);
Head method_head(std::string_view method);

struct RunOptions {
  bool record_timing = true;
  std::size_t jobs = 1;
};

/// Split with `seed`, train `method` with cfg.seed = seed, evaluate on test.
MetricReport run_method(const Graph& g, const std::string& dataset, double fraction, std::uint64_t seed,
                        const LGCLConfig& cfg, std::string_view method, const RunOptions& opts = {});

std::vector<MetricReport> run_ablation(const Graph& g, const std::string& dataset, double fraction,
                                       std::span<const std::uint64_t> seeds, const LGCLConfig& cfg,
                                       const RunOptions& opts = {});

std::vector<MetricReport> run_robustness(const Graph& g, const std::string& dataset,
                                         std::span<const double> fractions, std::span<const std::uint64_t> seeds,
                                         const LGCLConfig& cfg, const RunOptions& opts = {});

/// One LGCL run per (value, seed) with `param` set to each value; the method
/// column reads "lgcl[param=value]".
std::vector<MetricReport> run_sweep(const Graph& g, const std::string& dataset, double fraction,
                                    std::span<const std::uint64_t> seeds, const LGCLConfig& cfg,
                                    const std::string& param, std::span<const std::string> values,
                                    const RunOptions& opts = {});

struct BaselineOptions {
  KatzOptions katz;
  RootedPageRankOptions pagerank;
};

/// "katz" or "rooted-pagerank" on the split's observed graph.
MetricReport run_baseline(const EdgeSplit& split, const std::string& dataset, std::string_view method,
                          const BaselineOptions& opts = {}, const RunOptions& run = {});

void write_results_csv(const std::filesystem::path& path, std::span<const MetricReport> reports);
std::vector<MetricReport> read_results_csv(const std::filesystem::path& path);

struct SummaryRow {
  std::string method, dataset;
  double fraction = 0.0;
  std::size_t seeds = 0;
  double auc_mean = 0.0, auc_std = 0.0, ap_mean = 0.0, ap_std = 0.0;
};
/// Mean and sample standard deviation per (method, dataset, fraction), in
/// first-appearance order.
std::vector<SummaryRow> summarize(std::span<const MetricReport> reports);
void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows);

/// Per test link: u, v, label, then the contrast-space projections of both
/// views (s0.., l0..).
void export_embeddings(const std::filesystem::path& path, const ModelParams& params, const LGCLConfig& cfg,
                       const EdgeSplit& split);

}  // namespace lgcl
