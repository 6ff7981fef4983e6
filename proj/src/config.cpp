#include "lgcl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <cstdlib>

#include "lgcl/error.hpp"

namespace lgcl {

std::string format_double(double v) {
  // shortest text that parses back to the same double
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::uint64_t parse_uint(std::string_view key, std::string_view value) {
  std::uint64_t out = 0;
  auto r = std::from_chars(value.data(), value.data() + value.size(), out);
  if (r.ec != std::errc{} || r.ptr != value.data() + value.size()) {
    throw UsageError("config '" + std::string(key) + "': expected a non-negative integer, got '" + std::string(value) +
                     "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  std::string s(value);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw UsageError("config '" + std::string(key) + "': expected a number, got '" + s + "'");
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw UsageError("config '" + std::string(key) + "': expected a boolean, got '" + std::string(value) + "'");
}

}  // namespace

void validate(const LGCLConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw UsageError("invalid config: " + what);
  };
  require(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "alpha must lie in [0,1]");
  require(cfg.beta >= 0.0, "beta must be >= 0");
  require(cfg.tau > 0.0, "tau must be > 0");
  require(cfg.sortpool_k >= 1, "sortpool_k must be >= 1");
  require(cfg.hops >= 1, "hops must be >= 1");
  require(cfg.node_budget >= 2, "node_budget must be >= 2");
  require(cfg.max_label >= 1, "max_label must be >= 1");
  require(cfg.num_layers >= 1, "num_layers must be >= 1");
  require(cfg.hidden >= 1 && cfg.head_hidden >= 1 && cfg.contrast_dim >= 1, "widths must be >= 1");
  require(cfg.lr > 0.0, "lr must be > 0");
  require(cfg.batch_size >= 2, "batch_size must be >= 2 (contrastive negatives)");
  require(cfg.jobs >= 1, "jobs must be >= 1");
}

std::vector<std::pair<std::string, std::string>> to_key_values(const LGCLConfig& c) {
  return {
      {"hops", std::to_string(c.hops)},
      {"node_budget", std::to_string(c.node_budget)},
      {"max_label", std::to_string(c.max_label)},
      {"features", std::string(to_string(c.features))},
      {"num_layers", std::to_string(c.num_layers)},
      {"hidden", std::to_string(c.hidden)},
      {"sortpool_k", std::to_string(c.sortpool_k)},
      {"head_hidden", std::to_string(c.head_hidden)},
      {"contrast_dim", std::to_string(c.contrast_dim)},
      {"tau", format_double(c.tau)},
      {"alpha", format_double(c.alpha)},
      {"beta", format_double(c.beta)},
      {"contrast_include_positive", c.contrast_include_positive ? "true" : "false"},
      {"lr", format_double(c.lr)},
      {"epochs", std::to_string(c.epochs)},
      {"batch_size", std::to_string(c.batch_size)},
      {"seed", std::to_string(c.seed)},
  };
}

bool apply_key_value(LGCLConfig& c, std::string_view key, std::string_view value) {
  if (key == "hops") c.hops = static_cast<unsigned>(parse_uint(key, value));
  else if (key == "node_budget") c.node_budget = parse_uint(key, value);
  else if (key == "max_label") c.max_label = parse_uint(key, value);
  else if (key == "features") c.features = parse_feature_mode(value);
  else if (key == "num_layers") c.num_layers = parse_uint(key, value);
  else if (key == "hidden") c.hidden = parse_uint(key, value);
  else if (key == "sortpool_k") c.sortpool_k = parse_uint(key, value);
  else if (key == "head_hidden") c.head_hidden = parse_uint(key, value);
  else if (key == "contrast_dim") c.contrast_dim = parse_uint(key, value);
  else if (key == "tau") c.tau = parse_real(key, value);
  else if (key == "alpha") c.alpha = parse_real(key, value);
  else if (key == "beta") c.beta = parse_real(key, value);
  else if (key == "contrast_include_positive") c.contrast_include_positive = parse_bool(key, value);
  else if (key == "lr") c.lr = parse_real(key, value);
  else if (key == "epochs") c.epochs = parse_uint(key, value);
  else if (key == "batch_size" || key == "batch") c.batch_size = parse_uint(key, value);
  else if (key == "seed") c.seed = parse_uint(key, value);
  else if (key == "prune_inactive_losses") c.prune_inactive_losses = parse_bool(key, value);
  else if (key == "cache_budget_mb") c.cache_budget_mb = parse_uint(key, value);
  else if (key == "jobs") c.jobs = parse_uint(key, value);
  else return false;
  return true;
}

LGCLConfig config_from_key_values(const std::map<std::string, std::string>& kv) {
  LGCLConfig cfg;
  for (const auto& [k, v] : kv) {
    if (!apply_key_value(cfg, k, v)) throw UsageError("unknown config key '" + k + "'");
  }
  return cfg;
}

std::string config_hash(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const LGCLConfig& cfg) { return config_hash(to_key_values(cfg)); }

std::map<std::string, std::string> read_config_file(const std::string& path, const std::string& section) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw UsageError("config file: " + std::string(e.what()));
  }
  std::map<std::string, std::string> out;
  for (const auto& [key, node] : tree) {
    if (node.empty()) out[key] = node.data();
  }
  if (auto sec = tree.get_child_optional(section)) {
    for (const auto& [key, node] : *sec) out[key] = node.data();
  }
  return out;
}

}  // namespace lgcl
