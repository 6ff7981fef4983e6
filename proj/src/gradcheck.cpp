#include "lgcl/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lgcl/error.hpp"

namespace lgcl::ad {

namespace {

struct TraceScope {
  explicit TraceScope(std::vector<std::uint32_t>* t) : saved(branch_trace()) { set_branch_trace(t); }
  ~TraceScope() { set_branch_trace(saved); }
  std::vector<std::uint32_t>* saved;
};

double evaluate(const ScalarFn& f, std::span<const Tensor> inputs, std::vector<std::uint32_t>& trace) {
  trace.clear();
  TraceScope scope(&trace);
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  const double v = f(tape, vars).scalar();
  if (!std::isfinite(v)) throw NumericError("gradient check: function value is not finite");
  return v;
}

}  // namespace

std::string GradCheckReport::describe() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "%s: max rel %.3e, max abs %.3e (input %zu, entry %zu) over %zu entries, %zu at kinks skipped",
                passed ? "pass" : "FAIL", max_rel_error, max_abs_error, worst_input, worst_index, entries_checked,
                entries_nonsmooth);
  return buf;
}

GradCheckReport check_gradients(const ScalarFn& f, std::span<const Tensor> inputs, double step, double tol,
                                double floor) {
  if (!(step > 0.0)) throw UsageError("gradient check step must be positive");

  std::vector<Tensor> analytic;
  std::vector<std::uint32_t> base_trace, up_trace, down_trace;
  {
    TraceScope scope(&base_trace);
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
    Var out = f(tape, vars);
    if (!std::isfinite(out.scalar())) throw NumericError("gradient check: function value is not finite");
    tape.backward(out);
    for (Var v : vars) analytic.push_back(tape.grad(v));
  }

  GradCheckReport report;
  std::vector<Tensor> probe(inputs.begin(), inputs.end());
  for (std::size_t k = 0; k < probe.size(); ++k) {
    for (std::size_t i = 0; i < probe[k].size(); ++i) {
      const double saved = probe[k].data()[i];
      probe[k].data()[i] = saved + step;
      const double up = evaluate(f, probe, up_trace);
      probe[k].data()[i] = saved - step;
      const double down = evaluate(f, probe, down_trace);
      probe[k].data()[i] = saved;
      if (up_trace != base_trace || down_trace != base_trace) {
        ++report.entries_nonsmooth;
        continue;
      }

      const double numeric = (up - down) / (2.0 * step);
      const double exact = analytic[k].data()[i];
      if (!std::isfinite(exact)) throw NumericError("gradient check: analytic gradient is not finite");
      const double abs_err = std::abs(exact - numeric);
      const double rel_err = abs_err / std::max({std::abs(exact), std::abs(numeric), floor});
      report.max_abs_error = std::max(report.max_abs_error, abs_err);
      if (rel_err > report.max_rel_error || report.entries_checked == 0) {
        report.max_rel_error = std::max(report.max_rel_error, rel_err);
        report.worst_input = k;
        report.worst_index = i;
      }
      ++report.entries_checked;
    }
  }
  report.passed = report.entries_checked > 0 && report.max_rel_error < tol;
  return report;
}

}  // namespace lgcl::ad
