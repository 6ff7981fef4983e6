#include "lgcl/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "lgcl/error.hpp"
#include "lgcl/metrics.hpp"

namespace lgcl {

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Positives and negatives merged in ascending (u, v) order. AP breaks score
// ties by input order, so listing one class first would bias it.
std::vector<Edge> test_pairs(const EdgeSplit& split, std::vector<int>& labels) {
  std::vector<std::pair<Edge, int>> all;
  all.reserve(split.test_pos.size() + split.test_neg.size());
  for (const Edge& e : split.test_pos) all.emplace_back(e, 1);
  for (const Edge& e : split.test_neg) all.emplace_back(e, 0);
  std::sort(all.begin(), all.end());
  std::vector<Edge> pairs;
  pairs.reserve(all.size());
  labels.clear();
  for (const auto& [e, y] : all) {
    pairs.push_back(e);
    labels.push_back(y);
  }
  return pairs;
}

struct ViewOutputs {
  std::vector<double> prob_s, prob_l;
  std::vector<Tensor> proj_s, proj_l;
};

// Chunked forward passes with one constant-bound tape per chunk; every pair
// is written to its own slot so the thread count never changes a result.
ViewOutputs forward_pairs(const ModelParams& params, const LGCLConfig& cfg, const Graph& observed,
                          std::span<const Edge> pairs, bool want_s, bool want_l, bool want_proj) {
  const std::size_t n = pairs.size();
  ViewOutputs out;
  if (want_s) out.prob_s.assign(n, 0.0);
  if (want_l) out.prob_l.assign(n, 0.0);
  if (want_proj) {
    out.proj_s.resize(n);
    out.proj_l.resize(n);
  }
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  auto work = [&](std::size_t t, std::size_t stride) {
    for (std::size_t c = t; c < chunks; c += stride) {
      ad::Tape tape;
      BoundParams p(tape, params, false);
      for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
        const Sample s = build_sample(observed, pairs[i], 0.0, cfg);
        if (want_s || want_proj) {
          ad::Var pooled = encode_subgraph_pooled(p, cfg, s.subgraph.features, s.subgraph_prop);
          if (want_s) out.prob_s[i] = sigmoid(subgraph_logits(p, pooled).scalar());
          if (want_proj) out.proj_s[i] = project_subgraph(p, pooled).value();
        }
        if (want_l || want_proj) {
          ad::Var target = encode_line_graph_target(p, s.line_graph.features, s.line_graph_prop,
                                                    s.line_graph.target_index);
          if (want_l) out.prob_l[i] = sigmoid(line_graph_logits(p, target).scalar());
          if (want_proj) out.proj_l[i] = project_line_graph(p, target).value();
        }
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(cfg.jobs, 1);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(work, t, jobs);
  }
  return out;
}

std::string format_fraction(double f) {
  std::ostringstream s;
  s << f;
  return s.str();
}

}  // namespace

Head parse_head(std::string_view name) {
  if (name == "subgraph") return Head::subgraph;
  if (name == "linegraph") return Head::linegraph;
  if (name == "fused") return Head::fused;
  throw UsageError("unknown head '" + std::string(name) + "' (expected subgraph, linegraph or fused)");
}

std::string_view to_string(Head head) {
  switch (head) {
    case Head::subgraph:
      return "subgraph";
    case Head::linegraph:
      return "linegraph";
    case Head::fused:
      return "fused";
  }
  return "?";
}

ScoredPairs score_test_pairs(const ModelParams& params, const LGCLConfig& cfg, const EdgeSplit& split, Head head) {
  ScoredPairs sp;
  sp.pairs = test_pairs(split, sp.labels);
  const bool want_s = head != Head::linegraph;
  const bool want_l = head != Head::subgraph;
  auto out = forward_pairs(params, cfg, split.observed, sp.pairs, want_s, want_l, false);
  sp.scores.resize(sp.pairs.size());
  for (std::size_t i = 0; i < sp.pairs.size(); ++i) {
    switch (head) {
      case Head::subgraph:
        sp.scores[i] = out.prob_s[i];
        break;
      case Head::linegraph:
        sp.scores[i] = out.prob_l[i];
        break;
      case Head::fused:
        sp.scores[i] = 0.5 * (out.prob_s[i] + out.prob_l[i]);
        break;
    }
  }
  return sp;
}

MetricReport evaluate_model(const ModelParams& params, const LGCLConfig& cfg, const EdgeSplit& split, Head head) {
  const auto sp = score_test_pairs(params, cfg, split, head);
  MetricReport r;
  r.method = "lgcl";
  r.fraction = split.train_fraction;
  r.seed = split.seed;
  r.auc = roc_auc(sp.scores, sp.labels);
  r.ap = average_precision(sp.scores, sp.labels);
  r.n_pos = split.test_pos.size();
  r.n_neg = split.test_neg.size();
  r.config_hash = config_hash(cfg);
  return r;
}

LGCLConfig method_config(const LGCLConfig& base, std::string_view method) {
  LGCLConfig cfg = base;
  if (method == "lgcl") return cfg;
  if (method == "sg-only") {
    cfg.alpha = 0.0;
    cfg.beta = 0.0;
  } else if (method == "lg-only") {
    cfg.alpha = 1.0;
    cfg.beta = 0.0;
  } else if (method == "sg+lg") {
    cfg.beta = 0.0;
  } else {
    throw UsageError("unknown method '" + std::string(method) + "'");
  }
  return cfg;
}

Head method_head(std::string_view method) {
  if (method == "sg-only") return Head::subgraph;
  if (method == "lg-only") return Head::linegraph;
  if (method == "sg+lg" || method == "lgcl") return Head::fused;
  throw UsageError("unknown method '" + std::string(method) + "'");
}

MetricReport run_method(const Graph& g, const std::string& dataset, double fraction, std::uint64_t seed,
                        const LGCLConfig& base, std::string_view method, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  LGCLConfig cfg = method_config(base, method);
  cfg.seed = seed;
  cfg.jobs = opts.jobs;
  const EdgeSplit split = split_edges(g, fraction, seed);
  TrainOptions topts;
  topts.record_timing = opts.record_timing;
  const TrainResult tr = train(split, cfg, topts);
  MetricReport r = evaluate_model(tr.params, cfg, split, method_head(method));
  r.method = std::string(method);
  r.dataset = dataset;
  r.wall_seconds =
      opts.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  return r;
}

std::vector<MetricReport> run_ablation(const Graph& g, const std::string& dataset, double fraction,
                                       std::span<const std::uint64_t> seeds, const LGCLConfig& cfg,
                                       const RunOptions& opts) {
  std::vector<MetricReport> out;
  for (std::string_view m : kMethods) {
    for (std::uint64_t s : seeds) out.push_back(run_method(g, dataset, fraction, s, cfg, m, opts));
  }
  return out;
}

std::vector<MetricReport> run_robustness(const Graph& g, const std::string& dataset,
                                         std::span<const double> fractions, std::span<const std::uint64_t> seeds,
                                         const LGCLConfig& cfg, const RunOptions& opts) {
  std::vector<MetricReport> out;
  for (double f : fractions) {
    for (std::uint64_t s : seeds) out.push_back(run_method(g, dataset, f, s, cfg, "lgcl", opts));
  }
  return out;
}

std::vector<MetricReport> run_sweep(const Graph& g, const std::string& dataset, double fraction,
                                    std::span<const std::uint64_t> seeds, const LGCLConfig& cfg,
                                    const std::string& param, std::span<const std::string> values,
                                    const RunOptions& opts) {
  std::vector<MetricReport> out;
  for (const auto& value : values) {
    LGCLConfig c = cfg;
    if (!apply_key_value(c, param, value)) throw UsageError("unknown sweep parameter '" + param + "'");
    validate(c);
    for (std::uint64_t s : seeds) {
      MetricReport r = run_method(g, dataset, fraction, s, c, "lgcl", opts);
      r.method = "lgcl[" + param + "=" + value + "]";
      out.push_back(std::move(r));
    }
  }
  return out;
}

MetricReport run_baseline(const EdgeSplit& split, const std::string& dataset, std::string_view method,
                          const BaselineOptions& opts, const RunOptions& run) {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int> labels;
  const auto pairs = test_pairs(split, labels);
  std::vector<double> scores;
  std::string hash_src;
  if (method == "katz") {
    scores = katz_scores(split.observed, pairs, opts.katz);
    hash_src = config_hash({{"method", "katz"},
                            {"attenuation", format_double(opts.katz.attenuation)},
                            {"max_path_len", std::to_string(opts.katz.max_path_len)}});
  } else if (method == "rooted-pagerank") {
    scores = rooted_pagerank_scores(split.observed, pairs, opts.pagerank, run.jobs);
    hash_src = config_hash({{"method", "rooted-pagerank"},
                            {"restart", format_double(opts.pagerank.restart)},
                            {"max_iters", std::to_string(opts.pagerank.max_iters)},
                            {"tolerance", format_double(opts.pagerank.tolerance)}});
  } else {
    throw UsageError("unknown baseline '" + std::string(method) + "' (expected katz or rooted-pagerank)");
  }
  MetricReport r;
  r.method = std::string(method);
  r.dataset = dataset;
  r.fraction = split.train_fraction;
  r.seed = split.seed;
  r.auc = roc_auc(scores, labels);
  r.ap = average_precision(scores, labels);
  r.n_pos = split.test_pos.size();
  r.n_neg = split.test_neg.size();
  r.config_hash = hash_src;
  r.wall_seconds =
      run.record_timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() : 0.0;
  return r;
}

void write_results_csv(const std::filesystem::path& path, std::span<const MetricReport> reports) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "method,dataset,fraction,seed,auc,ap,wall_seconds,config_hash\n";
  for (const auto& r : reports) {
    out << r.method << ',' << r.dataset << ',' << format_fraction(r.fraction) << ',' << r.seed << ','
        << format_double(r.auc) << ',' << format_double(r.ap) << ',' << format_double(r.wall_seconds) << ','
        << r.config_hash << '\n';
  }
}

std::vector<MetricReport> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "method,dataset,fraction,seed,auc,ap,wall_seconds,config_hash") {
    throw DataError(path.string() + ": unexpected results header");
  }
  std::vector<MetricReport> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 8) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 8 fields");
    MetricReport r;
    try {
      r.method = f[0];
      r.dataset = f[1];
      r.fraction = std::stod(f[2]);
      r.seed = std::stoull(f[3]);
      r.auc = std::stod(f[4]);
      r.ap = std::stod(f[5]);
      r.wall_seconds = std::stod(f[6]);
      r.config_hash = f[7];
    } catch (const std::exception&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad number");
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SummaryRow> summarize(std::span<const MetricReport> reports) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<const MetricReport*>> groups;
  for (const auto& r : reports) {
    std::size_t k = 0;
    while (k < rows.size() &&
           !(rows[k].method == r.method && rows[k].dataset == r.dataset && rows[k].fraction == r.fraction)) {
      ++k;
    }
    if (k == rows.size()) {
      rows.push_back({r.method, r.dataset, r.fraction});
      groups.emplace_back();
    }
    groups[k].push_back(&r);
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& g = groups[k];
    const double n = static_cast<double>(g.size());
    double sa = 0, sp = 0;
    for (const auto* r : g) sa += r->auc, sp += r->ap;
    rows[k].seeds = g.size();
    rows[k].auc_mean = sa / n;
    rows[k].ap_mean = sp / n;
    if (g.size() > 1) {
      double va = 0, vp = 0;
      for (const auto* r : g) {
        va += (r->auc - rows[k].auc_mean) * (r->auc - rows[k].auc_mean);
        vp += (r->ap - rows[k].ap_mean) * (r->ap - rows[k].ap_mean);
      }
      rows[k].auc_std = std::sqrt(va / (n - 1));
      rows[k].ap_std = std::sqrt(vp / (n - 1));
    }
  }
  return rows;
}

void write_summary_csv(const std::filesystem::path& path, std::span<const SummaryRow> rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "method,dataset,fraction,seeds,auc_mean,auc_std,ap_mean,ap_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.dataset << ',' << format_fraction(r.fraction) << ',' << r.seeds << ','
        << format_double(r.auc_mean) << ',' << format_double(r.auc_std) << ',' << format_double(r.ap_mean) << ','
        << format_double(r.ap_std) << '\n';
  }
}

void export_embeddings(const std::filesystem::path& path, const ModelParams& params, const LGCLConfig& cfg,
                       const EdgeSplit& split) {
  std::vector<int> labels;
  const auto pairs = test_pairs(split, labels);
  const auto out = forward_pairs(params, cfg, split.observed, pairs, false, false, true);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  const std::size_t d = cfg.contrast_dim;
  f << "u,v,label";
  for (std::size_t j = 0; j < d; ++j) f << ",s" << j;
  for (std::size_t j = 0; j < d; ++j) f << ",l" << j;
  f << '\n';
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    f << pairs[i].u << ',' << pairs[i].v << ',' << labels[i];
    for (double x : out.proj_s[i].values()) f << ',' << format_double(x);
    for (double x : out.proj_l[i].values()) f << ',' << format_double(x);
    f << '\n';
  }
}

}  // namespace lgcl
