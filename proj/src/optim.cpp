#include "lgcl/optim.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "lgcl/error.hpp"

namespace lgcl {

bool Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) throw std::invalid_argument("Adam: params/grads count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->rows() != grads[k].rows() || params[k]->cols() != grads[k].cols()) {
      throw std::invalid_argument("Adam: gradient " + grads[k].shape_string() + " for parameter " +
                                  params[k]->shape_string());
    }
    if (!grads[k].all_finite()) {
      if (options_.fail_on_nonfinite) throw NumericError("Adam: non-finite gradient for parameter " + std::to_string(k));
      std::fprintf(stderr, "warning: non-finite gradient for parameter %zu, skipping optimizer step\n", k);
      ++skipped_;
      return false;
    }
  }
  if (m_.empty()) {
    for (Tensor* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  } else if (m_.size() != params.size()) {
    throw std::invalid_argument("Adam: parameter list changed between steps");
  }

  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* p = params[k]->data();
    const double* g = grads[k].data();
    double* m = m_[k].data();
    double* v = v_[k].data();
    for (std::size_t i = 0; i < grads[k].size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= options_.lr * m_hat / (std::sqrt(v_hat) + options_.eps);
    }
  }
  return true;
}

}  // namespace lgcl
