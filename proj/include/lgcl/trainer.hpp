#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "lgcl/autodiff.hpp"
#include "lgcl/config.hpp"
#include "lgcl/line_graph.hpp"
#include "lgcl/model.hpp"
#include "lgcl/optim.hpp"
#include "lgcl/split.hpp"
#include "lgcl/subgraph.hpp"

namespace lgcl {

/// Everything the model needs for one query pair: both views and their fixed
/// propagation operators.
struct Sample {
  Edge pair;
  double label = 0.0;
  EnclosingSubgraph subgraph;
  LineGraphView line_graph;
  ad::SparseMatrix subgraph_prop;
  ad::SparseMatrix line_graph_prop;

  std::size_t approx_bytes() const;
};

Sample build_sample(const Graph& observed, Edge pair, double label, const LGCLConfig& cfg);

/// Samples for a fixed list of pairs. Built once up front while the running
/// size stays under `budget_bytes`; pairs past the budget are rebuilt on each
/// access. Extraction is a pure function of (pair, config), so the two paths
/// give identical samples.
class SampleCache {
 public:
  SampleCache(const Graph& observed, std::vector<Edge> pairs, std::vector<double> labels, const LGCLConfig& cfg,
              std::size_t budget_bytes, std::size_t jobs = 1);

  std::size_t size() const { return pairs_.size(); }
  std::size_t cached() const { return cached_; }
  const Edge& pair(std::size_t i) const { return pairs_[i]; }
  double label(std::size_t i) const { return labels_[i]; }

  /// Cached sample, or `scratch` refilled and returned.
  const Sample& get(std::size_t i, Sample& scratch) const;

 private:
  const Graph* observed_;
  LGCLConfig cfg_;
  std::vector<Edge> pairs_;
  std::vector<double> labels_;
  std::vector<std::unique_ptr<Sample>> samples_;
  std::size_t cached_ = 0;
};

/// One row of the training history.
struct EpochRecord {
  std::size_t epoch = 0;
  // NaN when the component was pruned (zero weight) and never computed.
  double loss_s = 0.0;
  double loss_l = 0.0;
  double loss_con = 0.0;
  double loss_total = 0.0;
  double train_auc = 0.0;
  double wall_seconds = 0.0;
};

struct TrainOptions {
  /// When false, wall_seconds is written as 0 so histories compare byte for byte.
  bool record_timing = true;
  /// Checkpoint every k epochs into checkpoint_dir (0 = never).
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  std::size_t feature_width = 0;
  std::size_t steps = 0;
  std::size_t steps_skipped = 0;
  std::size_t cached_samples = 0;
};

/// Per-batch forward/backward result; exposed for tests.
struct BatchOutput {
  std::optional<double> loss_s, loss_l, loss_con;
  double loss_total = 0.0;
  std::vector<double> prob_s, prob_l;  // per sample, empty when not computed
  std::vector<Tensor> grads;           // same order as ModelParams::named()
};

/// Forward and backward over the given samples with the batch's contrastive
/// negatives being the other samples in `samples`.
BatchOutput run_batch(const ModelParams& params, const LGCLConfig& cfg, std::span<const Sample* const> samples);

/// Minibatch training over train_pos (label 1) and train_neg (label 0).
TrainResult train(const EdgeSplit& split, const LGCLConfig& cfg, const TrainOptions& options = {});

/// Shuffled batch order for one epoch; a trailing batch of one sample is
/// merged into the previous batch.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t num_samples, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch);

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace lgcl
