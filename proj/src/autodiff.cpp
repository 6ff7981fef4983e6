#include "lgcl/autodiff.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lgcl/error.hpp"
#include "lgcl/kernels.hpp"

namespace lgcl::ad {

namespace {

std::atomic<bool> g_checked{false};

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                              b.shape_string());
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.rows() == b.rows() && a.cols() == b.cols(); }

bool is_row_broadcast(const Tensor& a, const Tensor& b) {
  return b.rows() == 1 && b.cols() == a.cols() && a.rows() != 1;
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <class F>
Var unary(Var a, F&& forward, std::function<void(Tape&, const Tensor&, const Tensor&, const Tensor&, Tensor&)>
                                  backward_rule) {
  const Tensor& x = a.value();
  Tensor y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] = forward(x.data()[i]);
  const std::uint32_t ia = a.id();
  const std::uint32_t iy = static_cast<std::uint32_t>(a.tape().size());
  return a.tape().record(std::move(y), {a}, [ia, iy, backward_rule](Tape& t, const Tensor& g) {
    backward_rule(t, g, t.value(Var(&t, ia)), t.value(Var(&t, iy)), t.grad_buffer(ia));
  });
}

}  // namespace

void set_checked_mode(bool on) { g_checked.store(on); }
bool checked_mode() { return g_checked.load(); }

namespace {
thread_local std::vector<std::uint32_t>* t_branch_trace = nullptr;
}

void set_branch_trace(std::vector<std::uint32_t>* trace) { t_branch_trace = trace; }
std::vector<std::uint32_t>* branch_trace() { return t_branch_trace; }

const Tensor& Var::value() const { return tape_->value(*this); }

double Var::scalar() const {
  const Tensor& v = value();
  if (v.size() != 1) throw std::invalid_argument("scalar() on tensor of shape " + v.shape_string());
  return v.data()[0];
}

Var Tape::constant(Tensor value) { return record(std::move(value), std::span<const Var>{}, nullptr); }

Var Tape::variable(Tensor value) {
  Var v = record(std::move(value), std::span<const Var>{}, nullptr);
  nodes_.back().requires_grad = true;
  return v;
}

Var Tape::record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  return record(std::move(value), std::span<const Var>(parents.begin(), parents.size()), std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> parents, BackwardFn backward) {
  if (g_checked.load(std::memory_order_relaxed) && !value.all_finite()) {
    throw NumericError("non-finite value recorded at tape node " + std::to_string(nodes_.size()) + " of shape " +
                       value.shape_string());
  }
  bool needs = false;
  for (Var p : parents) needs = needs || nodes_[p.id()].requires_grad;
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty() && !n.value.empty()) return Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

Tensor& Tape::grad_buffer(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var output) {
  if (value(output).size() != 1) {
    throw std::invalid_argument("backward() needs a 1x1 output, got " + value(output).shape_string());
  }
  for (auto& n : nodes_) n.grad = Tensor();
  grad_buffer(output.id()).data()[0] = 1.0;
  for (std::size_t id = output.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, n.grad);
  }
}

Tensor SparseMatrix::to_dense() const {
  Tensor d(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) d(i, indices[p]) += values[p];
  }
  return d;
}

namespace {

// A + I in CSR with sorted columns; `weight(i, j)` supplies each entry.
template <class Weight>
SparseMatrix with_self_loops(const Graph& g, Weight&& weight) {
  SparseMatrix s;
  s.rows = s.cols = g.num_nodes();
  s.offsets.reserve(s.rows + 1);
  s.offsets.push_back(0);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    bool self_done = false;
    for (NodeId j : g.neighbors(i)) {
      if (!self_done && i < j) {
        s.indices.push_back(i);
        s.values.push_back(weight(i, i));
        self_done = true;
      }
      s.indices.push_back(j);
      s.values.push_back(weight(i, j));
    }
    if (!self_done) {
      s.indices.push_back(i);
      s.values.push_back(weight(i, i));
    }
    s.offsets.push_back(s.indices.size());
  }
  return s;
}

}  // namespace

SparseMatrix row_normalized_adjacency(const Graph& g) {
  return with_self_loops(g, [&](NodeId i, NodeId) { return 1.0 / static_cast<double>(g.degree(i) + 1); });
}

SparseMatrix symmetric_normalized_adjacency(const Graph& g) {
  return with_self_loops(g, [&](NodeId i, NodeId j) {
    return 1.0 / (std::sqrt(static_cast<double>(g.degree(i) + 1)) * std::sqrt(static_cast<double>(g.degree(j) + 1)));
  });
}

Var matmul(Var a, Var b) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.cols() != y.rows()) shape_error("matmul", x, y);
  const std::size_t m = x.rows(), k = x.cols(), n = y.cols();
  Tensor out(m, n);
  kernels::active().gemm_nn(m, n, k, x.data(), k, y.data(), n, out.data(), n);
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib, m, k, n](Tape& t, const Tensor& g) {
    const auto& kt = kernels::active();
    const Tensor& x = t.value(Var(&t, ia));
    const Tensor& y = t.value(Var(&t, ib));
    if (t.requires_grad(Var(&t, ia))) {
      Tensor yt(n, k);
      for (std::size_t p = 0; p < k; ++p) {
        for (std::size_t j = 0; j < n; ++j) yt(j, p) = y(p, j);
      }
      kt.gemm_nn(m, k, n, g.data(), n, yt.data(), k, t.grad_buffer(ia).data(), k);
    }
    if (t.requires_grad(Var(&t, ib))) {
      kt.gemm_tn(k, n, m, x.data(), k, g.data(), n, t.grad_buffer(ib).data(), n);
    }
  });
}

namespace {

enum class Arith { add, sub, mul };

Var elementwise(Var a, Var b, Arith op, const char* name) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  const bool broadcast = is_row_broadcast(x, y);
  if (!broadcast && !same_shape(x, y)) shape_error(name, x, y);
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x.data() + r * cols;
    const double* yr = y.data() + (broadcast ? 0 : r * cols);
    double* o = out.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      switch (op) {
        case Arith::add: o[c] = xr[c] + yr[c]; break;
        case Arith::sub: o[c] = xr[c] - yr[c]; break;
        case Arith::mul: o[c] = xr[c] * yr[c]; break;
      }
    }
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), {a, b}, [ia, ib, op, broadcast, rows, cols](Tape& t, const Tensor& g) {
    const auto& kt = kernels::active();
    const bool need_a = t.requires_grad(Var(&t, ia));
    const bool need_b = t.requires_grad(Var(&t, ib));
    const Tensor& x = t.value(Var(&t, ia));
    const Tensor& y = t.value(Var(&t, ib));
    for (std::size_t r = 0; r < rows; ++r) {
      const double* gr = g.data() + r * cols;
      const std::size_t yoff = broadcast ? 0 : r * cols;
      if (need_a) {
        double* da = t.grad_buffer(ia).data() + r * cols;
        if (op == Arith::mul) {
          kt.mul_acc(cols, gr, y.data() + yoff, da);
        } else {
          kt.axpy(cols, 1.0, gr, da);
        }
      }
      if (need_b) {
        double* db = t.grad_buffer(ib).data() + yoff;
        switch (op) {
          case Arith::add: kt.axpy(cols, 1.0, gr, db); break;
          case Arith::sub: kt.axpy(cols, -1.0, gr, db); break;
          case Arith::mul: kt.mul_acc(cols, gr, x.data() + r * cols, db); break;
        }
      }
    }
  });
}

}  // namespace

Var add(Var a, Var b) { return elementwise(a, b, Arith::add, "add"); }
Var sub(Var a, Var b) { return elementwise(a, b, Arith::sub, "sub"); }
Var mul(Var a, Var b) { return elementwise(a, b, Arith::mul, "mul"); }

Var scale(Var a, double factor) {
  return unary(a, [factor](double x) { return factor * x; },
               [factor](Tape&, const Tensor& g, const Tensor&, const Tensor&, Tensor& da) {
                 kernels::active().axpy(g.size(), factor, g.data(), da.data());
               });
}

Var relu(Var a) {
  if (auto* trace = branch_trace()) {
    for (double x : a.value().values()) trace->push_back(x > 0.0);
  }
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](Tape&, const Tensor& g, const Tensor& x, const Tensor&, Tensor& da) {
                 for (std::size_t i = 0; i < g.size(); ++i) {
                   if (x.data()[i] > 0.0) da.data()[i] += g.data()[i];
                 }
               });
}

Var tanh(Var a) {
  return unary(a, [](double x) { return std::tanh(x); },
               [](Tape&, const Tensor& g, const Tensor&, const Tensor& y, Tensor& da) {
                 for (std::size_t i = 0; i < g.size(); ++i) {
                   const double yi = y.data()[i];
                   da.data()[i] += g.data()[i] * (1.0 - yi * yi);
                 }
               });
}

Var sigmoid(Var a) {
  return unary(a, stable_sigmoid, [](Tape&, const Tensor& g, const Tensor&, const Tensor& y, Tensor& da) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double yi = y.data()[i];
      da.data()[i] += g.data()[i] * yi * (1.0 - yi);
    }
  });
}

Var log(Var a) {
  return unary(a, [](double x) { return std::log(x); },
               [](Tape&, const Tensor& g, const Tensor& x, const Tensor&, Tensor& da) {
                 for (std::size_t i = 0; i < g.size(); ++i) da.data()[i] += g.data()[i] / x.data()[i];
               });
}

Var exp(Var a) {
  return unary(a, [](double x) { return std::exp(x); },
               [](Tape&, const Tensor& g, const Tensor&, const Tensor& y, Tensor& da) {
                 kernels::active().mul_acc(g.size(), g.data(), y.data(), da.data());
               });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (p.rows() != rows) shape_error("concat_cols", parts[0].value(), p.value());
    cols += p.cols();
  }
  Tensor out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> widths;
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(v.data() + r * v.cols(), v.cols(), out.data() + r * cols + offset);
    }
    offset += v.cols();
    ids.push_back(p.id());
    widths.push_back(v.cols());
  }
  return parts[0].tape().record(std::move(out), parts, [ids, widths, rows, cols](Tape& t, const Tensor& g) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(Var(&t, ids[k]))) {
        Tensor& d = t.grad_buffer(ids[k]);
        for (std::size_t r = 0; r < rows; ++r) {
          kernels::active().axpy(widths[k], 1.0, g.data() + r * cols + offset, d.data() + r * widths[k]);
        }
      }
      offset += widths[k];
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    if (p.cols() != cols) shape_error("concat_rows", parts[0].value(), p.value());
    rows += p.rows();
  }
  Tensor out(rows, cols);
  std::vector<std::uint32_t> ids;
  std::vector<std::size_t> sizes;
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& v = p.value();
    std::copy_n(v.data(), v.size(), out.data() + offset);
    offset += v.size();
    ids.push_back(p.id());
    sizes.push_back(v.size());
  }
  return parts[0].tape().record(std::move(out), parts, [ids, sizes](Tape& t, const Tensor& g) {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (t.requires_grad(Var(&t, ids[k]))) {
        kernels::active().axpy(sizes[k], 1.0, g.data() + offset, t.grad_buffer(ids[k]).data());
      }
      offset += sizes[k];
    }
  });
}

Var gather_rows(Var a, std::span<const std::size_t> index) {
  const Tensor& x = a.value();
  const std::size_t cols = x.cols();
  Tensor out(index.size(), cols);
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= x.rows()) {
      throw std::invalid_argument("gather_rows: index " + std::to_string(index[r]) + " out of range for " +
                                  x.shape_string());
    }
    std::copy_n(x.data() + index[r] * cols, cols, out.data() + r * cols);
  }
  const auto ia = a.id();
  std::vector<std::size_t> idx(index.begin(), index.end());
  return a.tape().record(std::move(out), {a}, [ia, idx = std::move(idx), cols](Tape& t, const Tensor& g) {
    Tensor& da = t.grad_buffer(ia);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      kernels::active().axpy(cols, 1.0, g.data() + r * cols, da.data() + idx[r] * cols);
    }
  });
}

Var pad_rows(Var a, std::size_t total_rows) {
  const Tensor& x = a.value();
  if (total_rows < x.rows()) {
    throw std::invalid_argument("pad_rows: cannot shrink " + x.shape_string() + " to " + std::to_string(total_rows) +
                                " rows");
  }
  Tensor out(total_rows, x.cols());
  std::copy_n(x.data(), x.size(), out.data());
  const auto ia = a.id();
  const std::size_t n = x.size();
  return a.tape().record(std::move(out), {a}, [ia, n](Tape& t, const Tensor& g) {
    kernels::active().axpy(n, 1.0, g.data(), t.grad_buffer(ia).data());
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  const Tensor& x = a.value();
  if (rows * cols != x.size()) {
    throw std::invalid_argument("reshape: " + x.shape_string() + " has " + std::to_string(x.size()) +
                                " values, target (" + std::to_string(rows) + "x" + std::to_string(cols) + ")");
  }
  Tensor out(rows, cols, std::vector<double>(x.values().begin(), x.values().end()));
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, const Tensor& g) {
    kernels::active().axpy(g.size(), 1.0, g.data(), t.grad_buffer(ia).data());
  });
}

Var transpose(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.cols(), x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) out(c, r) = x(r, c);
  }
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, const Tensor& g) {
    Tensor& da = t.grad_buffer(ia);
    for (std::size_t r = 0; r < da.rows(); ++r) {
      for (std::size_t c = 0; c < da.cols(); ++c) da(r, c) += g(c, r);
    }
  });
}

Var sum(Var a) {
  const Tensor& x = a.value();
  double s = 0.0;
  for (double v : x.values()) s += v;
  const auto ia = a.id();
  return a.tape().record(Tensor(1, 1, s), {a}, [ia](Tape& t, const Tensor& g) {
    Tensor& da = t.grad_buffer(ia);
    for (double& v : da.values()) v += g.data()[0];
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw std::invalid_argument("mean of empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var row_sum(Var a) {
  const Tensor& x = a.value();
  Tensor out(x.rows(), 1);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double s = 0.0;
    for (double v : x.row(r)) s += v;
    out(r, 0) = s;
  }
  const auto ia = a.id();
  return a.tape().record(std::move(out), {a}, [ia](Tape& t, const Tensor& g) {
    Tensor& da = t.grad_buffer(ia);
    for (std::size_t r = 0; r < da.rows(); ++r) {
      for (double& v : da.row(r)) v += g(r, 0);
    }
  });
}

Var normalize_rows(Var a, double eps) {
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor out(rows, cols);
  std::vector<double> norms(rows);
  std::vector<bool> clamped(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (double v : x.row(r)) ss += v * v;
    const double norm = std::sqrt(ss);
    if (norm == 0.0 && checked_mode()) throw NumericError("normalize_rows: zero-norm row " + std::to_string(r));
    clamped[r] = norm <= eps;
    norms[r] = clamped[r] ? eps : norm;
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = x(r, c) / norms[r];
  }
  const auto ia = a.id();
  const auto iy = static_cast<std::uint32_t>(a.tape().size());
  return a.tape().record(std::move(out), {a},
                         [ia, iy, norms = std::move(norms), clamped = std::move(clamped)](Tape& t, const Tensor& g) {
                           const Tensor& y = t.value(Var(&t, iy));
                           Tensor& da = t.grad_buffer(ia);
                           for (std::size_t r = 0; r < y.rows(); ++r) {
                             double dot = 0.0;
                             if (!clamped[r]) {
                               for (std::size_t c = 0; c < y.cols(); ++c) dot += y(r, c) * g(r, c);
                             }
                             for (std::size_t c = 0; c < y.cols(); ++c) {
                               da(r, c) += (g(r, c) - y(r, c) * dot) / norms[r];
                             }
                           }
                         });
}

Var cosine_similarity(Var a, Var b, double eps) {
  const Tensor& x = a.value();
  const Tensor& y = b.value();
  if (x.rows() != 1 || !same_shape(x, y)) shape_error("cosine_similarity", x, y);
  double dot = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dot += x.data()[i] * y.data()[i];
    sx += x.data()[i] * x.data()[i];
    sy += y.data()[i] * y.data()[i];
  }
  double nx = std::sqrt(sx), ny = std::sqrt(sy);
  if ((nx == 0.0 || ny == 0.0) && checked_mode()) throw NumericError("cosine_similarity: zero-norm input");
  const bool clamp_x = nx <= eps, clamp_y = ny <= eps;
  nx = clamp_x ? eps : nx;
  ny = clamp_y ? eps : ny;
  const double sim = dot / (nx * ny);
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(Tensor(1, 1, sim), {a, b},
                         [ia, ib, nx, ny, sim, clamp_x, clamp_y](Tape& t, const Tensor& g) {
                           const Tensor& x = t.value(Var(&t, ia));
                           const Tensor& y = t.value(Var(&t, ib));
                           const double gs = g.data()[0];
                           if (t.requires_grad(Var(&t, ia))) {
                             Tensor& da = t.grad_buffer(ia);
                             for (std::size_t i = 0; i < x.size(); ++i) {
                               double d = y.data()[i] / (nx * ny);
                               if (!clamp_x) d -= sim * x.data()[i] / (nx * nx);
                               da.data()[i] += gs * d;
                             }
                           }
                           if (t.requires_grad(Var(&t, ib))) {
                             Tensor& db = t.grad_buffer(ib);
                             for (std::size_t i = 0; i < y.size(); ++i) {
                               double d = x.data()[i] / (nx * ny);
                               if (!clamp_y) d -= sim * y.data()[i] / (ny * ny);
                               db.data()[i] += gs * d;
                             }
                           }
                         });
}

Var propagate(const SparseMatrix& s, Var a) {
  const Tensor& x = a.value();
  if (s.cols != x.rows()) {
    throw std::invalid_argument("propagate: operator (" + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
                                ") vs input " + x.shape_string());
  }
  const std::size_t cols = x.cols();
  Tensor out(s.rows, cols);
  const auto& kt = kernels::active();
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t p = s.offsets[i]; p < s.offsets[i + 1]; ++p) {
      kt.axpy(cols, s.values[p], x.data() + s.indices[p] * cols, out.data() + i * cols);
    }
  }
  const auto ia = a.id();
  const SparseMatrix* op = &s;
  return a.tape().record(std::move(out), {a}, [ia, op, cols](Tape& t, const Tensor& g) {
    Tensor& da = t.grad_buffer(ia);
    const auto& kt = kernels::active();
    for (std::size_t i = 0; i < op->rows; ++i) {
      for (std::size_t p = op->offsets[i]; p < op->offsets[i + 1]; ++p) {
        kt.axpy(cols, op->values[p], g.data() + i * cols, da.data() + op->indices[p] * cols);
      }
    }
  });
}

Var bce_with_logits(Var logits, const Tensor& labels) {
  const Tensor& x = logits.value();
  if (x.cols() != 1 || !same_shape(x, labels)) shape_error("bce_with_logits", x, labels);
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("bce_with_logits: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = x(i, 0), y = labels(i, 0);
    total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
  }
  const auto ia = logits.id();
  return logits.tape().record(Tensor(1, 1, total / static_cast<double>(n)), {logits},
                              [ia, labels, n](Tape& t, const Tensor& g) {
                                const Tensor& x = t.value(Var(&t, ia));
                                Tensor& da = t.grad_buffer(ia);
                                const double scale = g.data()[0] / static_cast<double>(n);
                                for (std::size_t i = 0; i < n; ++i) {
                                  da(i, 0) += scale * (stable_sigmoid(x(i, 0)) - labels(i, 0));
                                }
                              });
}

}  // namespace lgcl::ad
