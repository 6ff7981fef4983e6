#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "lgcl/tensor.hpp"

namespace lgcl {

/// Named tensors plus free-form string metadata. On disk:
///
///   lgcl-checkpoint 1
///   meta <key> <value...>
///   tensor <name> <rows> <cols>
///   <row values, %.17g, space separated>   (one line per row)
///
/// Values are printed with 17 significant digits, which round-trips doubles
/// exactly.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Tensor>> tensors;

  const Tensor& tensor(const std::string& name) const;
};

inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace lgcl
