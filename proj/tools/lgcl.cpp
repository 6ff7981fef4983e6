// lgcl command-line driver.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lgcl/checkpoint.hpp"
#include "lgcl/config.hpp"
#include "lgcl/error.hpp"
#include "lgcl/experiments.hpp"
#include "lgcl/graph.hpp"
#include "lgcl/kernels.hpp"
#include "lgcl/line_graph.hpp"
#include "lgcl/model.hpp"
#include "lgcl/split.hpp"
#include "lgcl/subgraph.hpp"
#include "lgcl/trainer.hpp"

namespace fs = std::filesystem;
using namespace lgcl;

namespace {

// Hyperparameter flags. Values are kept as strings so that a flag given on
// the command line can be told apart from one left at its default, and
// layered over the config file.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::map<std::string, std::string> values;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "key=value config file; [<command>] section overrides globals")
        ->check(CLI::ExistingFile);
    LGCLConfig defaults;
    auto kv = to_key_values(defaults);
    kv.emplace_back("prune_inactive_losses", defaults.prune_inactive_losses ? "true" : "false");
    kv.emplace_back("cache_budget_mb", std::to_string(defaults.cache_budget_mb));
    kv.emplace_back("jobs", std::to_string(defaults.jobs));
    for (const auto& [key, def] : kv) {
      std::string flag = "--" + key;
      for (char& c : flag) c = c == '_' ? '-' : c;
      if (key == "batch_size") flag += ",--batch";
      auto* opt = app.add_option(flag, values[key], help_for(key))->default_str(def);
      options.emplace_back(key, opt);
    }
  }

  LGCLConfig resolve(const std::string& section) const {
    LGCLConfig cfg;
    if (!config_path.empty()) {
      for (const auto& [k, v] : read_config_file(config_path, section)) {
        if (!apply_key_value(cfg, k, v)) throw UsageError("config file: unknown key '" + k + "'");
      }
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() > 0) apply_key_value(cfg, key, values.at(key));
    }
    validate(cfg);
    return cfg;
  }

  static std::string help_for(const std::string& key) {
    static const std::map<std::string, std::string> help = {
        {"hops", "enclosing subgraph radius h"},
        {"node_budget", "max nodes per enclosing subgraph"},
        {"max_label", "structural labels above this are clamped"},
        {"features", "node features: constant|degree|drnl"},
        {"num_layers", "graph convolution layers per encoder"},
        {"hidden", "hidden width"},
        {"sortpool_k", "rows kept by SortPooling"},
        {"head_hidden", "hidden width of the subgraph classifier head"},
        {"contrast_dim", "projection width for the contrastive loss"},
        {"tau", "contrastive temperature"},
        {"alpha", "weight of the line-graph loss"},
        {"beta", "weight of the contrastive loss"},
        {"contrast_include_positive", "add the positive pair to the contrastive denominator"},
        {"lr", "Adam learning rate"},
        {"epochs", "training epochs"},
        {"batch_size", "pairs per batch"},
        {"seed", "random seed"},
        {"prune_inactive_losses", "skip loss terms whose weight is zero"},
        {"cache_budget_mb", "memory budget for precomputed samples"},
        {"jobs", "worker threads"},
    };
    return help.at(key);
  }
};

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoull(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError("bad seed '" + tok + "'");
    }
  }
  if (out.empty()) throw UsageError("no seeds given");
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

std::string dataset_name(const std::string& path) { return fs::path(path).stem().string(); }

struct SplitSource {
  std::string split_dir;
  std::string dataset;
  double fraction = 0.8;
  std::uint64_t seed = 1;

  void attach(CLI::App& app) {
    app.add_option("--split", split_dir, "split directory written by `lgcl split`");
    app.add_option("--dataset", dataset, "edge-list file (used when --split is absent)");
    app.add_option("--fraction", fraction, "training fraction of edges")->capture_default_str();
    app.add_option("--split-seed", seed, "seed of the split")->capture_default_str();
  }

  EdgeSplit load() const {
    if (!split_dir.empty()) return load_split(split_dir);
    if (dataset.empty()) throw UsageError("either --split or --dataset is required");
    return split_edges(load_edge_list(dataset).graph, fraction, seed);
  }

  std::string name() const {
    if (!dataset.empty()) return dataset_name(dataset);
    return fs::path(split_dir).filename().string();
  }
};

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

int fail(ErrorKind kind, const std::string& what) {
  const char* name = kind == ErrorKind::usage ? "usage" : kind == ErrorKind::data ? "data" : "numeric";
  std::fprintf(stderr, "lgcl: error code=%d kind=%s message=\"%s\"\n", static_cast<int>(kind), name,
               one_line(what).c_str());
  return static_cast<int>(kind);
}

void print_reports(const std::vector<MetricReport>& reports) {
  for (const auto& r : reports) {
    std::printf("%-24s %-12s fraction=%g seed=%llu auc=%.4f ap=%.4f\n", r.method.c_str(), r.dataset.c_str(),
                r.fraction, static_cast<unsigned long long>(r.seed), r.auc, r.ap);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line graph contrastive learning for link prediction"};
  app.require_subcommand(1);
  bool no_timing = false;
  app.add_flag("--no-timing", no_timing, "write 0 for wall_seconds so outputs compare byte for byte");

  // split
  auto* split_cmd = app.add_subcommand("split", "partition a graph into train/test positives and negatives");
  std::string split_dataset, split_out;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 1;
  split_cmd->add_option("--dataset", split_dataset, "edge-list file")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--fraction", split_fraction, "training fraction of edges")->capture_default_str();
  split_cmd->add_option("--seed", split_seed, "split seed")->capture_default_str();
  split_cmd->add_option("--out", split_out, "output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model and write checkpoint plus history");
  ConfigFlags train_cfg;
  SplitSource train_src;
  std::string train_out;
  std::size_t checkpoint_every = 0;
  train_cfg.attach(*train_cmd);
  train_src.attach(*train_cmd);
  train_cmd->add_option("--out", train_out, "output directory")->required();
  train_cmd->add_option("--checkpoint-every", checkpoint_every, "also checkpoint every k epochs (0 = off)")
      ->capture_default_str();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score the test pairs of a split with a checkpoint");
  std::string eval_ckpt, eval_out, eval_head = "fused", eval_method = "lgcl";
  SplitSource eval_src;
  std::size_t eval_jobs = 1;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval_src.attach(*eval_cmd);
  eval_cmd->add_option("--head", eval_head, "subgraph|linegraph|fused")->capture_default_str();
  eval_cmd->add_option("--method", eval_method, "method label written to the results")->capture_default_str();
  eval_cmd->add_option("--jobs", eval_jobs, "worker threads")->capture_default_str();
  eval_cmd->add_option("--out", eval_out, "results CSV (printed only when absent)");

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "sg-only, lg-only, sg+lg and lgcl over several seeds");
  ConfigFlags ablate_cfg;
  std::string ablate_dataset, ablate_out, ablate_seeds = "1,2,3";
  double ablate_fraction = 0.8;
  ablate_cfg.attach(*ablate_cmd);
  ablate_cmd->add_option("--dataset", ablate_dataset, "edge-list file")->required()->check(CLI::ExistingFile);
  ablate_cmd->add_option("--fraction", ablate_fraction, "training fraction")->capture_default_str();
  ablate_cmd->add_option("--seeds", ablate_seeds, "comma-separated seeds")->capture_default_str();
  ablate_cmd->add_option("--out", ablate_out, "output directory")->required();

  // robustness
  auto* robust_cmd = app.add_subcommand("robustness", "lgcl across training fractions");
  ConfigFlags robust_cfg;
  std::string robust_dataset, robust_out, robust_seeds = "1,2,3", robust_fractions = "0.3,0.4,0.5,0.6,0.7,0.8";
  robust_cfg.attach(*robust_cmd);
  robust_cmd->add_option("--dataset", robust_dataset, "edge-list file")->required()->check(CLI::ExistingFile);
  robust_cmd->add_option("--fractions", robust_fractions, "comma-separated fractions")->capture_default_str();
  robust_cmd->add_option("--seeds", robust_seeds, "comma-separated seeds")->capture_default_str();
  robust_cmd->add_option("--out", robust_out, "output directory")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "lgcl over values of one hyperparameter");
  ConfigFlags sweep_cfg;
  std::string sweep_dataset, sweep_out, sweep_param, sweep_values, sweep_seeds = "1,2,3";
  double sweep_fraction = 0.8;
  sweep_cfg.attach(*sweep_cmd);
  sweep_cmd->add_option("--dataset", sweep_dataset, "edge-list file")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--fraction", sweep_fraction, "training fraction")->capture_default_str();
  sweep_cmd->add_option("--param", sweep_param, "config key to vary, e.g. alpha or batch")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--seeds", sweep_seeds, "comma-separated seeds")->capture_default_str();
  sweep_cmd->add_option("--out", sweep_out, "output directory")->required();

  // baseline
  auto* base_cmd = app.add_subcommand("baseline", "Katz or rooted PageRank scores on a split");
  std::string base_method, base_out;
  SplitSource base_src;
  BaselineOptions base_opts;
  std::size_t base_jobs = 1;
  base_cmd->add_option("--method", base_method, "katz|rooted-pagerank")->required();
  base_src.attach(*base_cmd);
  base_cmd->add_option("--attenuation", base_opts.katz.attenuation, "Katz attenuation")->capture_default_str();
  base_cmd->add_option("--max-path-len", base_opts.katz.max_path_len, "Katz path-length cutoff")
      ->capture_default_str();
  base_cmd->add_option("--restart", base_opts.pagerank.restart, "rooted PageRank restart probability")
      ->capture_default_str();
  base_cmd->add_option("--max-iters", base_opts.pagerank.max_iters, "rooted PageRank iteration cap")
      ->capture_default_str();
  base_cmd->add_option("--jobs", base_jobs, "worker threads")->capture_default_str();
  base_cmd->add_option("--out", base_out, "results CSV (printed only when absent)");

  // export-embeddings
  auto* emb_cmd = app.add_subcommand("export-embeddings", "per-link projections of both views");
  std::string emb_ckpt, emb_out;
  SplitSource emb_src;
  emb_cmd->add_option("--checkpoint", emb_ckpt, "checkpoint file")->required()->check(CLI::ExistingFile);
  emb_src.attach(*emb_cmd);
  emb_cmd->add_option("--out", emb_out, "output CSV")->required();

  // line-graph (debug)
  auto* lg_cmd = app.add_subcommand("line-graph", "dump a line graph as a canonical edge list");
  std::string lg_dataset, lg_out, lg_pair;
  unsigned lg_hops = 2;
  std::size_t lg_budget = 100;
  std::uint64_t lg_seed = 1;
  lg_cmd->add_option("--dataset", lg_dataset, "edge-list file")->required()->check(CLI::ExistingFile);
  lg_cmd->add_option("--pair", lg_pair, "u,v (file ids): use the enclosing subgraph of this pair");
  lg_cmd->add_option("--hops", lg_hops, "subgraph radius with --pair")->capture_default_str();
  lg_cmd->add_option("--node-budget", lg_budget, "subgraph node cap with --pair")->capture_default_str();
  lg_cmd->add_option("--seed", lg_seed, "subsampling seed with --pair")->capture_default_str();
  lg_cmd->add_option("--out", lg_out, "output file (stdout when absent)");

  // model-summary
  auto* sum_cmd = app.add_subcommand("model-summary", "list parameter tensors and counts");
  ConfigFlags sum_cfg;
  std::string sum_ckpt;
  sum_cfg.attach(*sum_cmd);
  sum_cmd->add_option("--checkpoint", sum_ckpt, "summarize this checkpoint instead")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(ErrorKind::usage, e.what());
  }

  try {
    if (*split_cmd) {
      const auto file = load_edge_list(split_dataset);
      const auto split = split_edges(file.graph, split_fraction, split_seed);
      save_split(split_out, split);
      save_id_map(fs::path(split_out) / "id_map.txt", file.original_ids);
      std::printf("nodes=%zu edges=%zu train_pos=%zu train_neg=%zu test_pos=%zu test_neg=%zu\n",
                  file.graph.num_nodes(), file.graph.num_edges(), split.train_pos.size(), split.train_neg.size(),
                  split.test_pos.size(), split.test_neg.size());
    } else if (*train_cmd) {
      const LGCLConfig cfg = train_cfg.resolve("train");
      const EdgeSplit split = train_src.load();
      TrainOptions opts;
      opts.record_timing = !no_timing;
      opts.checkpoint_every = checkpoint_every;
      opts.checkpoint_dir = train_out;
      opts.on_epoch = [](const EpochRecord& r) {
        std::fprintf(stderr, "epoch %zu L_total=%.6f train_auc=%.4f\n", r.epoch, r.loss_total, r.train_auc);
      };
      const TrainResult res = train(split, cfg, opts);
      save_checkpoint(fs::path(train_out) / "model.ckpt", to_checkpoint(res.params, cfg));
      write_history_csv(fs::path(train_out) / "history.csv", res.history);
      std::printf("config_hash=%s steps=%zu skipped=%zu cached=%zu\n", config_hash(cfg).c_str(), res.steps,
                  res.steps_skipped, res.cached_samples);
    } else if (*eval_cmd) {
      auto [cfg, params] = from_checkpoint(load_checkpoint(eval_ckpt));
      cfg.jobs = eval_jobs;
      const EdgeSplit split = eval_src.load();
      MetricReport r = evaluate_model(params, cfg, split, parse_head(eval_head));
      r.method = eval_method;
      r.dataset = eval_src.name();
      std::vector<MetricReport> reports{r};
      if (!eval_out.empty()) write_results_csv(eval_out, reports);
      print_reports(reports);
    } else if (*ablate_cmd) {
      const LGCLConfig cfg = ablate_cfg.resolve("ablate");
      const auto g = load_edge_list(ablate_dataset).graph;
      const auto seeds = parse_seeds(ablate_seeds);
      const auto reports =
          run_ablation(g, dataset_name(ablate_dataset), ablate_fraction, seeds, cfg, {!no_timing, cfg.jobs});
      write_results_csv(fs::path(ablate_out) / "results.csv", reports);
      write_summary_csv(fs::path(ablate_out) / "summary.csv", summarize(reports));
      print_reports(reports);
    } else if (*robust_cmd) {
      const LGCLConfig cfg = robust_cfg.resolve("robustness");
      const auto g = load_edge_list(robust_dataset).graph;
      const auto seeds = parse_seeds(robust_seeds);
      std::vector<double> fractions;
      for (const auto& f : split_list(robust_fractions)) fractions.push_back(std::stod(f));
      const auto reports =
          run_robustness(g, dataset_name(robust_dataset), fractions, seeds, cfg, {!no_timing, cfg.jobs});
      write_results_csv(fs::path(robust_out) / "results.csv", reports);
      write_summary_csv(fs::path(robust_out) / "summary.csv", summarize(reports));
      print_reports(reports);
    } else if (*sweep_cmd) {
      const LGCLConfig cfg = sweep_cfg.resolve("sweep");
      const auto g = load_edge_list(sweep_dataset).graph;
      const auto seeds = parse_seeds(sweep_seeds);
      const auto values = split_list(sweep_values);
      std::string param = sweep_param;
      for (char& c : param) c = c == '-' ? '_' : c;
      const auto reports =
          run_sweep(g, dataset_name(sweep_dataset), sweep_fraction, seeds, cfg, param, values, {!no_timing, cfg.jobs});
      write_results_csv(fs::path(sweep_out) / "results.csv", reports);
      write_summary_csv(fs::path(sweep_out) / "summary.csv", summarize(reports));
      print_reports(reports);
    } else if (*base_cmd) {
      const EdgeSplit split = base_src.load();
      std::vector<MetricReport> reports{
          run_baseline(split, base_src.name(), base_method, base_opts, {!no_timing, base_jobs})};
      if (!base_out.empty()) write_results_csv(base_out, reports);
      print_reports(reports);
    } else if (*emb_cmd) {
      const auto [cfg, params] = from_checkpoint(load_checkpoint(emb_ckpt));
      export_embeddings(emb_out, params, cfg, emb_src.load());
    } else if (*lg_cmd) {
      const auto file = load_edge_list(lg_dataset);
      std::vector<Edge> out_edges;
      if (lg_pair.empty()) {
        const auto edges = file.graph.edges();
        const Graph lg = line_graph_adjacency(file.graph.num_nodes(), edges);
        out_edges.assign(lg.edges().begin(), lg.edges().end());
      } else {
        const auto parts = split_list(lg_pair);
        if (parts.size() != 2) throw UsageError("--pair expects u,v");
        auto lookup = [&](const std::string& s) -> NodeId {
          const std::uint64_t id = std::stoull(s);
          for (std::size_t i = 0; i < file.original_ids.size(); ++i) {
            if (file.original_ids[i] == id) return static_cast<NodeId>(i);
          }
          throw DataError("node " + s + " is not in the graph");
        };
        const Edge pair{lookup(parts[0]), lookup(parts[1])};
        const auto sg = extract_subgraph(file.graph, pair, lg_hops, lg_budget, lg_seed);
        const auto lg = to_line_graph(sg);
        out_edges.assign(lg.adjacency.edges().begin(), lg.adjacency.edges().end());
      }
      if (lg_out.empty()) {
        for (const Edge& e : out_edges) std::printf("%u %u\n", e.u, e.v);
      } else {
        save_edge_list(lg_out, out_edges);
      }
    } else if (*sum_cmd) {
      if (!sum_ckpt.empty()) {
        const auto [cfg, params] = from_checkpoint(load_checkpoint(sum_ckpt));
        std::fputs(model_summary(params, cfg).c_str(), stdout);
      } else {
        const LGCLConfig cfg = sum_cfg.resolve("model-summary");
        const auto params = ModelParams::zeros(cfg, feature_width(cfg.max_label, cfg.features));
        std::fputs(model_summary(params, cfg).c_str(), stdout);
      }
      std::printf("kernels %s\n", std::string(kernels::to_string(kernels::active().isa)).c_str());
    }
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(ErrorKind::data, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(ErrorKind::usage, e.what());
  } catch (const std::out_of_range& e) {
    return fail(ErrorKind::usage, e.what());
  }
  return 0;
}
