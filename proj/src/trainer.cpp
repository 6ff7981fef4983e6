#include "lgcl/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "lgcl/checkpoint.hpp"
#include "lgcl/error.hpp"
#include "lgcl/metrics.hpp"
#include "lgcl/random.hpp"

namespace lgcl {

namespace {

std::size_t sparse_bytes(const ad::SparseMatrix& s) {
  return s.offsets.size() * sizeof(std::size_t) + s.indices.size() * sizeof(std::uint32_t) +
         s.values.size() * sizeof(double);
}

std::size_t graph_bytes(const Graph& g) { return (g.num_nodes() + 1) * 8 + g.num_edges() * 2 * sizeof(NodeId); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::size_t Sample::approx_bytes() const {
  return sizeof(Sample) + graph_bytes(subgraph.local_graph) + graph_bytes(line_graph.adjacency) +
         subgraph.global_ids.size() * sizeof(NodeId) + subgraph.labels.size() * 4 +
         subgraph.features.size() * sizeof(double) + line_graph.features.size() * sizeof(double) +
         line_graph.nodes.size() * sizeof(Edge) + sparse_bytes(subgraph_prop) + sparse_bytes(line_graph_prop);
}

Sample build_sample(const Graph& observed, Edge pair, double label, const LGCLConfig& cfg) {
  Sample s;
  s.pair = pair;
  s.label = label;
  s.subgraph = make_subgraph(observed, pair, cfg.subgraph_options(), cfg.seed);
  s.line_graph = to_line_graph(s.subgraph);
  s.subgraph_prop = ad::row_normalized_adjacency(s.subgraph.local_graph);
  s.line_graph_prop = ad::symmetric_normalized_adjacency(s.line_graph.adjacency);
  return s;
}

SampleCache::SampleCache(const Graph& observed, std::vector<Edge> pairs, std::vector<double> labels,
                         const LGCLConfig& cfg, std::size_t budget_bytes, std::size_t jobs)
    : observed_(&observed), cfg_(cfg), pairs_(std::move(pairs)), labels_(std::move(labels)) {
  if (pairs_.size() != labels_.size()) throw std::invalid_argument("SampleCache: pairs and labels differ in length");
  samples_.resize(pairs_.size());
  jobs = std::max<std::size_t>(jobs, 1);
  const std::size_t chunk = 64 * jobs;
  std::size_t used = 0;
  for (std::size_t start = 0; start < pairs_.size(); start += chunk) {
    const std::size_t stop = std::min(pairs_.size(), start + chunk);
    auto work = [&](std::size_t t) {
      for (std::size_t i = start + t; i < stop; i += jobs) {
        samples_[i] = std::make_unique<Sample>(build_sample(observed, pairs_[i], labels_[i], cfg_));
      }
    };
    if (jobs == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(work, t);
    }
    bool full = false;
    for (std::size_t i = start; i < stop; ++i) {
      if (!full) {
        used += samples_[i]->approx_bytes();
        if (used > budget_bytes) full = true;
      }
      if (full) {
        samples_[i].reset();
      } else {
        ++cached_;
      }
    }
    if (full) break;
  }
}

const Sample& SampleCache::get(std::size_t i, Sample& scratch) const {
  if (samples_[i]) return *samples_[i];
  scratch = build_sample(*observed_, pairs_[i], labels_[i], cfg_);
  return scratch;
}

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t num_samples, std::size_t batch_size,
                                                    std::uint64_t seed, std::size_t epoch) {
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  std::vector<std::size_t> order(num_samples);
  for (std::size_t i = 0; i < num_samples; ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x65706f6368ULL + epoch));
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t s = 0; s < num_samples; s += batch_size) {
    const std::size_t e = std::min(num_samples, s + batch_size);
    if (e - s == 1 && !batches.empty()) {
      batches.back().push_back(order[s]);
    } else {
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s), order.begin() + static_cast<std::ptrdiff_t>(e));
    }
  }
  return batches;
}

BatchOutput run_batch(const ModelParams& params, const LGCLConfig& cfg, std::span<const Sample* const> samples) {
  const std::size_t n = samples.size();
  const bool prune = cfg.prune_inactive_losses;
  const bool need_con = !prune || cfg.beta != 0.0;
  const bool need_s = !prune || cfg.alpha != 1.0 || need_con;
  const bool need_l = !prune || cfg.alpha != 0.0 || need_con;
  if (need_con && n < 2) throw UsageError("contrastive loss needs at least 2 samples per batch");

  ad::Tape tape;
  BoundParams p(tape, params, true);
  Tensor labels(n, 1);
  for (std::size_t i = 0; i < n; ++i) labels(i, 0) = samples[i]->label;

  BatchOutput out;
  ad::Var pooled, targets, loss_s, loss_l, loss_con;
  if (need_s) {
    std::vector<ad::Var> rows;
    rows.reserve(n);
    for (const Sample* s : samples) {
      rows.push_back(encode_subgraph_pooled(p, cfg, s->subgraph.features, s->subgraph_prop));
    }
    pooled = ad::concat_rows(rows);
    ad::Var logits = subgraph_logits(p, pooled);
    loss_s = ad::bce_with_logits(logits, labels);
    for (std::size_t i = 0; i < n; ++i) out.prob_s.push_back(sigmoid(logits.value()(i, 0)));
    out.loss_s = loss_s.scalar();
  }
  if (need_l) {
    std::vector<ad::Var> rows;
    rows.reserve(n);
    for (const Sample* s : samples) {
      rows.push_back(
          encode_line_graph_target(p, s->line_graph.features, s->line_graph_prop, s->line_graph.target_index));
    }
    targets = ad::concat_rows(rows);
    ad::Var logits = line_graph_logits(p, targets);
    loss_l = ad::bce_with_logits(logits, labels);
    for (std::size_t i = 0; i < n; ++i) out.prob_l.push_back(sigmoid(logits.value()(i, 0)));
    out.loss_l = loss_l.scalar();
  }
  if (need_con) {
    loss_con = contrastive_loss(project_subgraph(p, pooled), project_line_graph(p, targets), cfg.tau,
                                cfg.contrast_include_positive);
    out.loss_con = loss_con.scalar();
  }

  // Same operation order as total_loss(); a skipped term has weight zero and
  // would only add a signed zero.
  ad::Var total;
  if (need_l && need_s && need_con) {
    total = total_loss(loss_s, loss_l, loss_con, cfg.alpha, cfg.beta);
  } else {
    std::vector<ad::Var> terms;
    if (need_l) terms.push_back(ad::scale(loss_l, cfg.alpha));
    if (need_s) terms.push_back(ad::scale(loss_s, 1.0 - cfg.alpha));
    if (need_con) terms.push_back(ad::scale(loss_con, cfg.beta));
    total = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) total = ad::add(total, terms[i]);
  }
  out.loss_total = total.scalar();
  if (!std::isfinite(out.loss_total)) return out;

  tape.backward(total);
  for (const ad::Var& v : p.all()) out.grads.push_back(tape.grad(v));
  return out;
}

TrainResult train(const EdgeSplit& split, const LGCLConfig& cfg, const TrainOptions& options) {
  validate(cfg);
  std::vector<Edge> pairs = split.train_pos;
  pairs.insert(pairs.end(), split.train_neg.begin(), split.train_neg.end());
  std::vector<double> labels(split.train_pos.size(), 1.0);
  labels.resize(pairs.size(), 0.0);
  if (pairs.size() < 2) throw DataError("training split has fewer than 2 pairs");

  SampleCache cache(split.observed, pairs, labels, cfg, cfg.cache_budget_mb << 20, cfg.jobs);
  const std::size_t fw = feature_width(cfg.max_label, cfg.features);

  TrainResult result;
  result.params = ModelParams::initialize(cfg, fw, cfg.seed);
  result.feature_width = fw;
  result.cached_samples = cache.cached();
  Adam adam(AdamOptions{.lr = cfg.lr});
  auto named = result.params.named();
  std::vector<Tensor*> slots;
  for (auto& [name, t] : named) slots.push_back(t);

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Sample> scratch(cfg.batch_size + 1);
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto batches = epoch_batches(pairs.size(), cfg.batch_size, cfg.seed, epoch);
    double sum_s = 0, sum_l = 0, sum_con = 0, sum_total = 0;
    bool have_s = false, have_l = false, have_con = false;
    std::vector<double> epoch_scores;
    std::vector<int> epoch_labels;
    epoch_scores.reserve(pairs.size());
    epoch_labels.reserve(pairs.size());
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      if (scratch.size() < batch.size()) scratch.resize(batch.size());
      std::vector<const Sample*> ptrs;
      ptrs.reserve(batch.size());
      for (std::size_t k = 0; k < batch.size(); ++k) ptrs.push_back(&cache.get(batch[k], scratch[k]));

      BatchOutput bo = run_batch(result.params, cfg, ptrs);
      const bool finite = std::isfinite(bo.loss_total) && (!bo.loss_s || std::isfinite(*bo.loss_s)) &&
                          (!bo.loss_l || std::isfinite(*bo.loss_l)) && (!bo.loss_con || std::isfinite(*bo.loss_con));
      if (!finite) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << " batch " << b << " (L_S=" << bo.loss_s.value_or(kNaN)
            << " L_L=" << bo.loss_l.value_or(kNaN) << " L_CON=" << bo.loss_con.value_or(kNaN)
            << " L_total=" << bo.loss_total << "; pairs";
        for (std::size_t k = 0; k < std::min<std::size_t>(batch.size(), 8); ++k) {
          msg << ' ' << pairs[batch[k]].u << '-' << pairs[batch[k]].v;
        }
        if (batch.size() > 8) msg << " ...";
        msg << ')';
        throw NumericError(msg.str());
      }
      if (!adam.step(slots, bo.grads)) ++result.steps_skipped;
      ++result.steps;

      const double w = static_cast<double>(batch.size());
      if (bo.loss_s) sum_s += *bo.loss_s * w, have_s = true;
      if (bo.loss_l) sum_l += *bo.loss_l * w, have_l = true;
      if (bo.loss_con) sum_con += *bo.loss_con * w, have_con = true;
      sum_total += bo.loss_total * w;
      for (std::size_t k = 0; k < batch.size(); ++k) {
        double score;
        if (!bo.prob_s.empty() && !bo.prob_l.empty()) {
          score = 0.5 * (bo.prob_s[k] + bo.prob_l[k]);
        } else {
          score = bo.prob_s.empty() ? bo.prob_l[k] : bo.prob_s[k];
        }
        epoch_scores.push_back(score);
        epoch_labels.push_back(labels[batch[k]] > 0.5 ? 1 : 0);
      }
    }
    const double m = static_cast<double>(pairs.size());
    EpochRecord rec;
    rec.epoch = epoch;
    rec.loss_s = have_s ? sum_s / m : kNaN;
    rec.loss_l = have_l ? sum_l / m : kNaN;
    rec.loss_con = have_con ? sum_con / m : kNaN;
    rec.loss_total = sum_total / m;
    rec.train_auc = roc_auc(epoch_scores, epoch_labels);
    rec.wall_seconds =
        options.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
    result.history.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
    if (options.checkpoint_every > 0 && epoch % options.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "epoch_%03zu.ckpt", epoch);
      save_checkpoint(options.checkpoint_dir / name, to_checkpoint(result.params, cfg));
    }
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "epoch,L_S,L_L,L_CON,L_total,train_auc,wall_seconds\n";
  auto field = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& r : history) {
    out << r.epoch << ',' << field(r.loss_s) << ',' << field(r.loss_l) << ',' << field(r.loss_con) << ','
        << field(r.loss_total) << ',' << field(r.train_auc) << ',' << format_double(r.wall_seconds) << '\n';
  }
}

}  // namespace lgcl
