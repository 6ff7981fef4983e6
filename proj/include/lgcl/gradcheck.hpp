#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lgcl/autodiff.hpp"
#include "lgcl/tensor.hpp"

namespace lgcl::ad {

/// Builds a scalar (1x1) output from tape variables holding `inputs`.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_index = 0;
  std::size_t entries_checked = 0;
  std::size_t entries_nonsmooth = 0;  // probes that changed a branch; not compared
  bool passed = false;

  std::string describe() const;
};

/// Compares reverse-mode gradients of `f` against central differences
/// (f(x+h) - f(x-h)) / 2h, entry by entry.
///
/// The relative error of an entry is |analytic - numeric| / max(|analytic|,
/// |numeric|, floor); `floor` keeps entries whose true gradient is ~0 from
/// dividing by roundoff. An entry whose +h or -h probe takes a different
/// relu/SortPooling branch than the unperturbed point is counted in
/// entries_nonsmooth and not compared, since the difference quotient spans a
/// kink there. Throws NumericError if f produces a non-finite value.
GradCheckReport check_gradients(const ScalarFn& f, std::span<const Tensor> inputs, double step = 1e-3,
                                double tol = 1e-4, double floor = 1e-2);

}  // namespace lgcl::ad
