#include "lgcl/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "lgcl/error.hpp"
#include "lgcl/random.hpp"

namespace lgcl {

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

struct Shapes {
  struct Entry {
    std::string name;
    std::size_t rows, cols;
    bool bias;
  };
  std::vector<Entry> entries;
};

// Shape list in named() order.
Shapes shapes_for(const LGCLConfig& cfg, std::size_t fw) {
  Shapes s;
  const std::size_t H = cfg.hidden;
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    s.entries.push_back({"sg.w" + std::to_string(l), l == 0 ? fw : H, H, false});
    s.entries.push_back({"sg.b" + std::to_string(l), 1, H, true});
  }
  const std::size_t pw = pooled_width(cfg);
  s.entries.push_back({"sg.head.w1", pw, cfg.head_hidden, false});
  s.entries.push_back({"sg.head.b1", 1, cfg.head_hidden, true});
  s.entries.push_back({"sg.head.w2", cfg.head_hidden, 1, false});
  s.entries.push_back({"sg.head.b2", 1, 1, true});
  for (std::size_t l = 0; l < cfg.num_layers; ++l) {
    s.entries.push_back({"lg.w" + std::to_string(l), l == 0 ? 2 * fw : H, H, false});
    s.entries.push_back({"lg.b" + std::to_string(l), 1, H, true});
  }
  s.entries.push_back({"lg.head.w1", H, H, false});
  s.entries.push_back({"lg.head.b1", 1, H, true});
  s.entries.push_back({"lg.head.w2", H, 1, false});
  s.entries.push_back({"lg.head.b2", 1, 1, true});
  s.entries.push_back({"proj.s.w", pw, cfg.contrast_dim, false});
  s.entries.push_back({"proj.s.b", 1, cfg.contrast_dim, true});
  s.entries.push_back({"proj.l.w", H, cfg.contrast_dim, false});
  s.entries.push_back({"proj.l.b", 1, cfg.contrast_dim, true});
  return s;
}

ModelParams allocate(const LGCLConfig& cfg) {
  ModelParams p;
  p.sg_weight.resize(cfg.num_layers);
  p.sg_bias.resize(cfg.num_layers);
  p.lg_weight.resize(cfg.num_layers);
  p.lg_bias.resize(cfg.num_layers);
  return p;
}

template <class P, class T>
std::vector<std::pair<std::string, T*>> named_impl(P& p) {
  std::vector<std::pair<std::string, T*>> out;
  for (std::size_t l = 0; l < p.sg_weight.size(); ++l) {
    out.emplace_back("sg.w" + std::to_string(l), &p.sg_weight[l]);
    out.emplace_back("sg.b" + std::to_string(l), &p.sg_bias[l]);
  }
  out.emplace_back("sg.head.w1", &p.sg_head_w1);
  out.emplace_back("sg.head.b1", &p.sg_head_b1);
  out.emplace_back("sg.head.w2", &p.sg_head_w2);
  out.emplace_back("sg.head.b2", &p.sg_head_b2);
  for (std::size_t l = 0; l < p.lg_weight.size(); ++l) {
    out.emplace_back("lg.w" + std::to_string(l), &p.lg_weight[l]);
    out.emplace_back("lg.b" + std::to_string(l), &p.lg_bias[l]);
  }
  out.emplace_back("lg.head.w1", &p.lg_head_w1);
  out.emplace_back("lg.head.b1", &p.lg_head_b1);
  out.emplace_back("lg.head.w2", &p.lg_head_w2);
  out.emplace_back("lg.head.b2", &p.lg_head_b2);
  out.emplace_back("proj.s.w", &p.proj_s_w);
  out.emplace_back("proj.s.b", &p.proj_s_b);
  out.emplace_back("proj.l.w", &p.proj_l_w);
  out.emplace_back("proj.l.b", &p.proj_l_b);
  return out;
}

ad::Var affine(ad::Var x, ad::Var w, ad::Var b) { return ad::add(ad::matmul(x, w), b); }

}  // namespace

std::size_t pooled_width(const LGCLConfig& cfg) { return cfg.sortpool_k * cfg.num_layers * cfg.hidden; }

ModelParams ModelParams::initialize(const LGCLConfig& cfg, std::size_t feature_width, std::uint64_t seed) {
  ModelParams p = allocate(cfg);
  Rng rng(mix_seed(seed, 0x696e6974));
  const auto shapes = shapes_for(cfg, feature_width);
  auto slots = p.named();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const auto& e = shapes.entries[i];
    *slots[i].second = e.bias ? Tensor(e.rows, e.cols) : glorot(e.rows, e.cols, rng);
  }
  return p;
}

ModelParams ModelParams::zeros(const LGCLConfig& cfg, std::size_t feature_width) {
  ModelParams p = allocate(cfg);
  const auto shapes = shapes_for(cfg, feature_width);
  auto slots = p.named();
  for (std::size_t i = 0; i < slots.size(); ++i) {
    *slots[i].second = Tensor(shapes.entries[i].rows, shapes.entries[i].cols);
  }
  return p;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::named() { return named_impl<ModelParams, Tensor>(*this); }

std::vector<std::pair<std::string, const Tensor*>> ModelParams::named() const {
  return named_impl<const ModelParams, const Tensor>(*this);
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t->size();
  return n;
}

BoundParams::BoundParams(ad::Tape& tape, const ModelParams& params, bool trainable) {
  auto bind = [&](const Tensor& t) { return trainable ? tape.variable(t) : tape.constant(t); };
  for (std::size_t l = 0; l < params.sg_weight.size(); ++l) {
    sg_weight.push_back(bind(params.sg_weight[l]));
    sg_bias.push_back(bind(params.sg_bias[l]));
  }
  sg_head_w1 = bind(params.sg_head_w1);
  sg_head_b1 = bind(params.sg_head_b1);
  sg_head_w2 = bind(params.sg_head_w2);
  sg_head_b2 = bind(params.sg_head_b2);
  for (std::size_t l = 0; l < params.lg_weight.size(); ++l) {
    lg_weight.push_back(bind(params.lg_weight[l]));
    lg_bias.push_back(bind(params.lg_bias[l]));
  }
  lg_head_w1 = bind(params.lg_head_w1);
  lg_head_b1 = bind(params.lg_head_b1);
  lg_head_w2 = bind(params.lg_head_w2);
  lg_head_b2 = bind(params.lg_head_b2);
  proj_s_w = bind(params.proj_s_w);
  proj_s_b = bind(params.proj_s_b);
  proj_l_w = bind(params.proj_l_w);
  proj_l_b = bind(params.proj_l_b);
}

BoundParams::BoundParams(std::span<const ad::Var> vars, std::size_t num_layers) {
  if (vars.size() != 4 * num_layers + 12) throw std::invalid_argument("BoundParams: wrong number of vars");
  std::size_t k = 0;
  for (std::size_t l = 0; l < num_layers; ++l) {
    sg_weight.push_back(vars[k++]);
    sg_bias.push_back(vars[k++]);
  }
  sg_head_w1 = vars[k++];
  sg_head_b1 = vars[k++];
  sg_head_w2 = vars[k++];
  sg_head_b2 = vars[k++];
  for (std::size_t l = 0; l < num_layers; ++l) {
    lg_weight.push_back(vars[k++]);
    lg_bias.push_back(vars[k++]);
  }
  lg_head_w1 = vars[k++];
  lg_head_b1 = vars[k++];
  lg_head_w2 = vars[k++];
  lg_head_b2 = vars[k++];
  proj_s_w = vars[k++];
  proj_s_b = vars[k++];
  proj_l_w = vars[k++];
  proj_l_b = vars[k++];
}

std::vector<ad::Var> BoundParams::all() const {
  std::vector<ad::Var> out;
  for (std::size_t l = 0; l < sg_weight.size(); ++l) {
    out.push_back(sg_weight[l]);
    out.push_back(sg_bias[l]);
  }
  out.insert(out.end(), {sg_head_w1, sg_head_b1, sg_head_w2, sg_head_b2});
  for (std::size_t l = 0; l < lg_weight.size(); ++l) {
    out.push_back(lg_weight[l]);
    out.push_back(lg_bias[l]);
  }
  out.insert(out.end(), {lg_head_w1, lg_head_b1, lg_head_w2, lg_head_b2, proj_s_w, proj_s_b, proj_l_w, proj_l_b});
  return out;
}

std::vector<std::size_t> sortpool_order(const Tensor& ch) {
  std::vector<std::size_t> order(ch.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t c = ch.cols();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t j = c; j-- > 0;) {
      const double x = ch(a, j), y = ch(b, j);
      if (x != y) return x > y;
    }
    return a < b;
  });
  if (auto* trace = ad::branch_trace()) {
    for (std::size_t i : order) trace->push_back(static_cast<std::uint32_t>(i));
  }
  return order;
}

ad::Var encode_subgraph_pooled(const BoundParams& p, const LGCLConfig& cfg, const Tensor& features,
                               const ad::SparseMatrix& propagation) {
  ad::Tape& tape = p.sg_weight.front().tape();
  ad::Var z = tape.constant(features);
  std::vector<ad::Var> layers;
  layers.reserve(p.sg_weight.size());
  for (std::size_t l = 0; l < p.sg_weight.size(); ++l) {
    z = ad::tanh(ad::add(ad::propagate(propagation, ad::matmul(z, p.sg_weight[l])), p.sg_bias[l]));
    layers.push_back(z);
  }
  ad::Var all = layers.size() == 1 ? layers[0] : ad::concat_cols(layers);
  auto order = sortpool_order(all.value());
  if (order.size() > cfg.sortpool_k) order.resize(cfg.sortpool_k);
  ad::Var pooled = ad::gather_rows(all, order);
  if (pooled.rows() < cfg.sortpool_k) pooled = ad::pad_rows(pooled, cfg.sortpool_k);
  return ad::reshape(pooled, 1, pooled_width(cfg));
}

ad::Var encode_line_graph_target(const BoundParams& p, const Tensor& features, const ad::SparseMatrix& propagation,
                                 std::size_t target_index) {
  ad::Tape& tape = p.lg_weight.front().tape();
  if (target_index >= features.rows()) throw std::invalid_argument("encode_line_graph_target: bad target index");
  ad::Var z = tape.constant(features);
  for (std::size_t l = 0; l < p.lg_weight.size(); ++l) {
    z = ad::relu(ad::add(ad::propagate(propagation, ad::matmul(z, p.lg_weight[l])), p.lg_bias[l]));
  }
  const std::size_t idx[1] = {target_index};
  return ad::gather_rows(z, idx);
}

ad::Var subgraph_logits(const BoundParams& p, ad::Var pooled_batch) {
  return affine(ad::relu(affine(pooled_batch, p.sg_head_w1, p.sg_head_b1)), p.sg_head_w2, p.sg_head_b2);
}

ad::Var line_graph_logits(const BoundParams& p, ad::Var target_batch) {
  return affine(ad::relu(affine(target_batch, p.lg_head_w1, p.lg_head_b1)), p.lg_head_w2, p.lg_head_b2);
}

ad::Var project_subgraph(const BoundParams& p, ad::Var pooled_batch) {
  return affine(pooled_batch, p.proj_s_w, p.proj_s_b);
}

ad::Var project_line_graph(const BoundParams& p, ad::Var target_batch) {
  return affine(target_batch, p.proj_l_w, p.proj_l_b);
}

ad::Var contrastive_loss(ad::Var proj_s, ad::Var proj_l, double tau, bool include_positive) {
  const std::size_t n = proj_s.rows();
  if (n < 2) throw UsageError("contrastive loss needs at least 2 samples per batch");
  if (proj_l.rows() != n || proj_l.cols() != proj_s.cols()) {
    throw std::invalid_argument("contrastive_loss: " + proj_s.value().shape_string() + " vs " +
                                proj_l.value().shape_string());
  }
  ad::Tape& tape = proj_s.tape();
  ad::Var s = ad::scale(ad::matmul(ad::normalize_rows(proj_s), ad::transpose(ad::normalize_rows(proj_l))), 1.0 / tau);
  Tensor mask(n, n, 1.0);
  Tensor eye = Tensor::identity(n);
  if (!include_positive) {
    for (std::size_t i = 0; i < n; ++i) mask(i, i) = 0.0;
  }
  // logsumexp shifted by each row's max over the denominator entries
  const Tensor& sv = s.value();
  Tensor neg_shift(n, n), shift(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (mask(i, j) != 0.0) m = std::max(m, sv(i, j));
    }
    shift(i, 0) = m;
    // masked entries only need a finite exp; the mask zeroes them
    for (std::size_t j = 0; j < n; ++j) neg_shift(i, j) = mask(i, j) != 0.0 ? -m : -sv(i, j);
  }
  ad::Var shifted = ad::add(s, tape.constant(std::move(neg_shift)));
  ad::Var denom = ad::row_sum(ad::mul(ad::exp(shifted), tape.constant(std::move(mask))));
  ad::Var log_denom = ad::add(ad::log(denom), tape.constant(std::move(shift)));
  ad::Var positive = ad::row_sum(ad::mul(s, tape.constant(std::move(eye))));
  return ad::mean(ad::sub(log_denom, positive));
}

std::pair<ad::Var, ad::Var> supervised_losses(ad::Var logits_s, ad::Var logits_l, const Tensor& labels) {
  return {ad::bce_with_logits(logits_s, labels), ad::bce_with_logits(logits_l, labels)};
}

ad::Var total_loss(ad::Var loss_s, ad::Var loss_l, ad::Var loss_con, double alpha, double beta) {
  return ad::add(ad::add(ad::scale(loss_l, alpha), ad::scale(loss_s, 1.0 - alpha)), ad::scale(loss_con, beta));
}

SubgraphEncoding encode_subgraph(const ModelParams& params, const LGCLConfig& cfg, const EnclosingSubgraph& sg) {
  ad::Tape tape;
  BoundParams p(tape, params, false);
  const auto prop = ad::row_normalized_adjacency(sg.local_graph);
  ad::Var pooled = encode_subgraph_pooled(p, cfg, sg.features, prop);
  ad::Var logit = subgraph_logits(p, pooled);
  return {pooled.value(), logit.scalar()};
}

LineGraphEncoding encode_line_graph(const ModelParams& params, const LineGraphView& lg) {
  ad::Tape tape;
  BoundParams p(tape, params, false);
  const auto prop = ad::symmetric_normalized_adjacency(lg.adjacency);
  ad::Var target = encode_line_graph_target(p, lg.features, prop, lg.target_index);
  ad::Var logit = line_graph_logits(p, target);
  return {target.value(), logit.scalar()};
}

Checkpoint to_checkpoint(const ModelParams& params, const LGCLConfig& cfg) {
  Checkpoint ckpt;
  for (const auto& [k, v] : to_key_values(cfg)) ckpt.meta["config." + k] = v;
  ckpt.meta["config_hash"] = config_hash(cfg);
  ckpt.meta["feature_width"] = std::to_string(params.sg_weight.empty() ? 0 : params.sg_weight[0].rows());
  for (const auto& [name, t] : params.named()) ckpt.tensors.emplace_back(name, *t);
  return ckpt;
}

std::pair<LGCLConfig, ModelParams> from_checkpoint(const Checkpoint& ckpt) {
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : ckpt.meta) {
    if (k.rfind("config.", 0) == 0) kv[k.substr(7)] = v;
  }
  LGCLConfig cfg;
  try {
    cfg = config_from_key_values(kv);
  } catch (const UsageError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  auto fw_it = ckpt.meta.find("feature_width");
  if (fw_it == ckpt.meta.end()) throw DataError("checkpoint lacks feature_width");
  const std::size_t fw = std::stoul(fw_it->second);
  ModelParams p = ModelParams::zeros(cfg, fw);
  for (auto& [name, slot] : p.named()) {
    const Tensor& t = ckpt.tensor(name);
    if (t.rows() != slot->rows() || t.cols() != slot->cols()) {
      throw DataError("checkpoint tensor '" + name + "' has shape " + t.shape_string() + ", expected " +
                      slot->shape_string());
    }
    *slot = t;
  }
  return {cfg, std::move(p)};
}

std::string model_summary(const ModelParams& params, const LGCLConfig& cfg) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "model lgcl  layers=%zu hidden=%zu sortpool_k=%zu contrast_dim=%zu\n",
                cfg.num_layers, cfg.hidden, cfg.sortpool_k, cfg.contrast_dim);
  out += buf;
  for (const auto& [name, t] : params.named()) {
    std::snprintf(buf, sizeof buf, "%-12s %-12s %zu\n", name.c_str(), t->shape_string().c_str(), t->size());
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "total parameters %zu\n", params.parameter_count());
  out += buf;
  return out;
}

}  // namespace lgcl
