#include "lgcl/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lgcl/error.hpp"

namespace lgcl {

const Tensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw DataError("checkpoint has no tensor '" + name + "'");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << "lgcl-checkpoint " << kCheckpointVersion << '\n';
  for (const auto& [k, v] : ckpt.meta) {
    if (k.find_first_of(" \n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw std::invalid_argument("checkpoint metadata must be single-token keys and single-line values");
    }
    out << "meta " << k << ' ' << v << '\n';
  }
  char buf[32];
  for (const auto& [name, t] : ckpt.tensors) {
    out << "tensor " << name << ' ' << t.rows() << ' ' << t.cols() << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
      for (std::size_t c = 0; c < t.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", t(r, c));
        if (c) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty checkpoint " + path.string());
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != "lgcl-checkpoint") throw DataError(path.string() + " is not an lgcl checkpoint");
    if (version != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
  }
  Checkpoint ckpt;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("meta ", 0) == 0) {
      auto rest = line.substr(5);
      auto sp = rest.find(' ');
      if (sp == std::string::npos) {
        ckpt.meta[rest] = "";
      } else {
        ckpt.meta[rest.substr(0, sp)] = rest.substr(sp + 1);
      }
      continue;
    }
    std::istringstream head(line);
    std::string kind, name;
    std::size_t rows = 0, cols = 0;
    if (!(head >> kind >> name >> rows >> cols) || kind != "tensor") {
      throw DataError("malformed checkpoint line: " + line);
    }
    std::vector<double> values;
    values.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw DataError("truncated tensor '" + name + "'");
      const char* p = line.c_str();
      for (std::size_t c = 0; c < cols; ++c) {
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p) throw DataError("bad value in tensor '" + name + "' row " + std::to_string(r));
        values.push_back(v);
        p = end;
      }
    }
    ckpt.tensors.emplace_back(name, Tensor(rows, cols, std::move(values)));
  }
  return ckpt;
}

}  // namespace lgcl
