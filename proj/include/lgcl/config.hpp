#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lgcl/subgraph.hpp"

namespace lgcl {

/// Model and training hyperparameters.
struct LGCLConfig {
  // sampling
  unsigned hops = 2;
  std::size_t node_budget = 100;
  std::size_t max_label = 8;
  FeatureMode features = FeatureMode::drnl;

  // encoders
  std::size_t num_layers = 3;
  std::size_t hidden = 32;
  std::size_t sortpool_k = 30;
  std::size_t head_hidden = 128;
  std::size_t contrast_dim = 64;

  // objective
  double tau = 0.5;
  double alpha = 0.3;
  double beta = 0.1;
  bool contrast_include_positive = false;

  // optimization
  double lr = 1e-3;
  std::size_t epochs = 15;
  std::size_t batch_size = 64;
  std::uint64_t seed = 1;

  // execution
  bool prune_inactive_losses = true;
  std::size_t cache_budget_mb = 2048;
  std::size_t jobs = 1;

  SubgraphOptions subgraph_options() const { return {hops, node_budget, max_label, features}; }
};

/// Throws UsageError when an invariant is violated (alpha outside [0,1],
/// beta < 0, tau <= 0, zero widths, ...).
void validate(const LGCLConfig& cfg);

/// Stable key order; values printed so that parsing them back is exact.
std::vector<std::pair<std::string, std::string>> to_key_values(const LGCLConfig& cfg);

/// Sets one field by key. Returns false for an unknown key; throws
/// UsageError for an unparsable value.
bool apply_key_value(LGCLConfig& cfg, std::string_view key, std::string_view value);

LGCLConfig config_from_key_values(const std::map<std::string, std::string>& kv);

/// FNV-1a over the "key=value\n" serialization, as 16 hex digits.
std::string config_hash(const std::vector<std::pair<std::string, std::string>>& kv);
std::string config_hash(const LGCLConfig& cfg);

/// Reads a flat key-value config file with optional [section] headers and
/// returns the global keys overlaid with the keys of `section`.
std::map<std::string, std::string> read_config_file(const std::string& path, const std::string& section);

std::string format_double(double v);

}  // namespace lgcl
