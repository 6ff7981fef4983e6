#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <vector>

#include "lgcl/graph.hpp"
#include "lgcl/tensor.hpp"

namespace lgcl::ad {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// lives and is not cleared.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::uint32_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  double scalar() const;

 private:
  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

/// Reverse-mode recorder. Nodes are appended in evaluation order, which is a
/// topological order, and `backward` walks them once in reverse.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf whose gradient is accumulated by backward().
  Var variable(Tensor value);

  /// Records an op result. `requires_grad` is true if any parent needs one;
  /// `backward` is dropped otherwise.
  Var record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);
  Var record(Tensor value, std::span<const Var> parents, BackwardFn backward);

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }

  /// Gradient of the last backward() output w.r.t. v (zeros if none flowed).
  Tensor grad(Var v) const;

  /// Accumulation target for op backward functions; allocated on first use.
  Tensor& grad_buffer(std::uint32_t id);

  /// Seeds d(output)/d(output) = 1 and propagates. Output must be 1x1.
  void backward(Var output);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

/// When on (off by default), every recorded value is checked for NaN/Inf and a
/// NumericError is thrown at the producing op.
void set_checked_mode(bool on);
bool checked_mode();

/// While set (per thread), piecewise ops append the branch they took: relu
/// input signs, SortPooling orders. Gradient checks compare traces to spot
/// probes that straddle a kink.
void set_branch_trace(std::vector<std::uint32_t>* trace);
std::vector<std::uint32_t>* branch_trace();

/// Constant sparse matrix in CSR form, used as a fixed propagation operator.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
  Tensor to_dense() const;
};

/// D^-1 (A + I): each row averages the node and its neighbors.
SparseMatrix row_normalized_adjacency(const Graph& g);
/// (D+I)^-1/2 (A + I) (D+I)^-1/2 with D the degree without self-loops.
SparseMatrix symmetric_normalized_adjacency(const Graph& g);

// Primitive ops. Each throws std::invalid_argument on a shape mismatch and
// names both shapes.
Var matmul(Var a, Var b);
/// Elementwise; `b` may also be a 1 x cols row broadcast over a's rows.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var relu(Var a);
Var tanh(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var exp(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
/// Row r of the result is row index[r] of a; duplicates accumulate in backward.
Var gather_rows(Var a, std::span<const std::size_t> index);
/// Appends zero rows up to `total_rows`.
Var pad_rows(Var a, std::size_t total_rows);
Var reshape(Var a, std::size_t rows, std::size_t cols);
Var transpose(Var a);
Var sum(Var a);
Var mean(Var a);
/// rows x 1 column of per-row sums.
Var row_sum(Var a);
/// Each row divided by max(norm, eps); throws on a zero row in checked mode.
Var normalize_rows(Var a, double eps = 1e-12);
/// a^T b / (|a| |b|) for two row vectors of equal length, as a 1x1 value.
Var cosine_similarity(Var a, Var b, double eps = 1e-12);
/// out = s * a for a constant sparse s.
Var propagate(const SparseMatrix& s, Var a);
/// Mean over rows of the numerically stable sigmoid cross-entropy
/// max(x,0) - x*y + log(1 + exp(-|x|)); `logits` and `labels` are n x 1.
Var bce_with_logits(Var logits, const Tensor& labels);

}  // namespace lgcl::ad
