#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lgcl/autodiff.hpp"
#include "lgcl/checkpoint.hpp"
#include "lgcl/config.hpp"
#include "lgcl/line_graph.hpp"
#include "lgcl/subgraph.hpp"
#include "lgcl/tensor.hpp"

namespace lgcl {

/// Trainable tensors of both encoders, both classifier heads and the two
/// projection heads that map each view into the shared contrast space.
struct ModelParams {
  std::vector<Tensor> sg_weight, sg_bias;  // subgraph GCN layers
  Tensor sg_head_w1, sg_head_b1, sg_head_w2, sg_head_b2;
  std::vector<Tensor> lg_weight, lg_bias;  // line-graph GCN layers
  Tensor lg_head_w1, lg_head_b1, lg_head_w2, lg_head_b2;
  Tensor proj_s_w, proj_s_b, proj_l_w, proj_l_b;

  /// Glorot-uniform weights, zero biases, seeded.
  static ModelParams initialize(const LGCLConfig& cfg, std::size_t feature_width, std::uint64_t seed);
  /// Same shapes, every entry zero.
  static ModelParams zeros(const LGCLConfig& cfg, std::size_t feature_width);

  /// Stable (name, tensor) list; the order is the optimizer and checkpoint order.
  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;
  std::size_t parameter_count() const;
};

/// Width of the flattened SortPooling output: k * num_layers * hidden.
std::size_t pooled_width(const LGCLConfig& cfg);

/// Parameters placed on a tape, as trainable variables or as constants.
struct BoundParams {
  std::vector<ad::Var> sg_weight, sg_bias;
  ad::Var sg_head_w1, sg_head_b1, sg_head_w2, sg_head_b2;
  std::vector<ad::Var> lg_weight, lg_bias;
  ad::Var lg_head_w1, lg_head_b1, lg_head_w2, lg_head_b2;
  ad::Var proj_s_w, proj_s_b, proj_l_w, proj_l_b;

  BoundParams(ad::Tape& tape, const ModelParams& params, bool trainable);
  /// From vars already on a tape, in ModelParams::named() order.
  BoundParams(std::span<const ad::Var> vars, std::size_t num_layers);
  /// Same order as ModelParams::named().
  std::vector<ad::Var> all() const;
};

/// Row ordering used by SortPooling: descending by the last channel, ties
/// broken by the preceding channels (last to first), then ascending row index.
std::vector<std::size_t> sortpool_order(const Tensor& channels);

/// Subgraph encoder up to the readout: tanh(D^-1 (A+I) Z W + b) per layer,
/// layer outputs concatenated, SortPooling to k rows (zero-padded), flattened
/// to 1 x pooled_width. `propagation` must outlive the tape's backward pass.
ad::Var encode_subgraph_pooled(const BoundParams& p, const LGCLConfig& cfg, const Tensor& features,
                               const ad::SparseMatrix& propagation);

/// Line-graph encoder: relu(Ahat Z w + b) per layer with the symmetric GCN
/// normalization; returns the target node's final-layer row (1 x hidden).
ad::Var encode_line_graph_target(const BoundParams& p, const Tensor& features, const ad::SparseMatrix& propagation,
                                 std::size_t target_index);

/// Two-layer classifier heads and linear projection heads over a batch
/// (one row per sample).
ad::Var subgraph_logits(const BoundParams& p, ad::Var pooled_batch);
ad::Var line_graph_logits(const BoundParams& p, ad::Var target_batch);
ad::Var project_subgraph(const BoundParams& p, ad::Var pooled_batch);
ad::Var project_line_graph(const BoundParams& p, ad::Var target_batch);

/// Mean over anchors n of -log(exp(sim(s_n, l_n)/tau) / sum_{m != n} exp(sim(s_n, l_m)/tau)),
/// with sim the cosine similarity. `include_positive` adds the m = n term to
/// the denominator (standard NT-Xent) for comparison. Needs N >= 2.
ad::Var contrastive_loss(ad::Var proj_s, ad::Var proj_l, double tau, bool include_positive = false);

/// (L_S, L_L): sigmoid cross-entropy of each head against the 0/1 labels,
/// averaged over the batch.
std::pair<ad::Var, ad::Var> supervised_losses(ad::Var logits_s, ad::Var logits_l, const Tensor& labels);

/// alpha * L_L + (1 - alpha) * L_S + beta * L_CON
ad::Var total_loss(ad::Var loss_s, ad::Var loss_l, ad::Var loss_con, double alpha, double beta);

/// Tape-free conveniences for single samples.
struct SubgraphEncoding {
  Tensor pooled;  // Z_S
  double logit = 0.0;
};
struct LineGraphEncoding {
  Tensor target;  // Z_L
  double logit = 0.0;
};
SubgraphEncoding encode_subgraph(const ModelParams& params, const LGCLConfig& cfg, const EnclosingSubgraph& sg);
LineGraphEncoding encode_line_graph(const ModelParams& params, const LineGraphView& lg);

Checkpoint to_checkpoint(const ModelParams& params, const LGCLConfig& cfg);
/// Rebuilds config and parameters; throws DataError on missing or misshapen tensors.
std::pair<LGCLConfig, ModelParams> from_checkpoint(const Checkpoint& ckpt);

/// One line per tensor with its shape and parameter count, plus totals.
std::string model_summary(const ModelParams& params, const LGCLConfig& cfg);

}  // namespace lgcl
