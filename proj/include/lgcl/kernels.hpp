#pragma once

#include <cstddef>
#include <string_view>

// Dense inner loops used by the autodiff ops.
//
// Every variant performs, for each output element, the same multiplies and
// adds in the same order as the scalar reference (no FMA contraction, no
// reassociated reductions), so the SIMD paths are bit-identical to scalar and
// results do not depend on which ISA the dispatcher picks.

namespace lgcl::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  /// C[m x n] += A[m x k] * B[k x n]; row-major with leading dimensions.
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc);
  /// C[m x n] += A^T * B where A is stored k x m.
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc);
  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  /// out += x * y (elementwise)
  void (*mul_acc)(std::size_t n, const double* x, const double* y, double* out);
};

const KernelTable& scalar_table();
/// nullptr when the variant was not compiled in.
const KernelTable* avx2_table();

bool cpu_supports(Isa isa);

/// Table chosen at first use: the widest ISA both compiled and supported by
/// the CPU, unless LGCL_ISA=scalar is set in the environment.
const KernelTable& active();

/// Pins the active table (tests, benchmarks). Throws if unsupported.
void force_isa(Isa isa);

std::string_view to_string(Isa isa);

}  // namespace lgcl::kernels
