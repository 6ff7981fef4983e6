#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lgcl/tensor.hpp"

namespace lgcl {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Throw NumericError on a non-finite gradient instead of skipping the step.
  bool fail_on_nonfinite = false;
};

/// Adam with bias correction. Moments are created zeroed on the first step.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  /// Applies one update in place. Returns false (and leaves params and moments
  /// untouched) when any gradient entry is non-finite and skipping is enabled.
  bool step(std::span<Tensor* const> params, std::span<const Tensor> grads);

  long steps_taken() const { return step_; }
  std::size_t steps_skipped() const { return skipped_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamOptions options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long step_ = 0;
  std::size_t skipped_ = 0;
};

}  // namespace lgcl
