// Compiled with -mavx2 (and deliberately without -mfma): mul and add stay
// separate instructions so each lane rounds exactly like the scalar loop.

#include <immintrin.h>

#include "lgcl/kernels.hpp"

namespace lgcl::kernels {

namespace {

// C row block [j0, j0+16) accumulated over p in ascending order, held in
// registers across the p loop. `stride_a` walks A along p.
inline void row_block16(std::size_t k, const double* a_row, std::size_t stride_a, const double* b,
                        std::size_t ldb, double* c) {
  __m256d c0 = _mm256_loadu_pd(c);
  __m256d c1 = _mm256_loadu_pd(c + 4);
  __m256d c2 = _mm256_loadu_pd(c + 8);
  __m256d c3 = _mm256_loadu_pd(c + 12);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d av = _mm256_set1_pd(a_row[p * stride_a]);
    const double* bp = b + p * ldb;
    c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(bp)));
    c1 = _mm256_add_pd(c1, _mm256_mul_pd(av, _mm256_loadu_pd(bp + 4)));
    c2 = _mm256_add_pd(c2, _mm256_mul_pd(av, _mm256_loadu_pd(bp + 8)));
    c3 = _mm256_add_pd(c3, _mm256_mul_pd(av, _mm256_loadu_pd(bp + 12)));
  }
  _mm256_storeu_pd(c, c0);
  _mm256_storeu_pd(c + 4, c1);
  _mm256_storeu_pd(c + 8, c2);
  _mm256_storeu_pd(c + 12, c3);
}

inline void row_block4(std::size_t k, const double* a_row, std::size_t stride_a, const double* b,
                       std::size_t ldb, double* c) {
  __m256d c0 = _mm256_loadu_pd(c);
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d av = _mm256_set1_pd(a_row[p * stride_a]);
    c0 = _mm256_add_pd(c0, _mm256_mul_pd(av, _mm256_loadu_pd(b + p * ldb)));
  }
  _mm256_storeu_pd(c, c0);
}

inline void row_tail(std::size_t k, const double* a_row, std::size_t stride_a, const double* b, std::size_t ldb,
                     double* c, std::size_t width) {
  for (std::size_t j = 0; j < width; ++j) {
    double acc = c[j];
    for (std::size_t p = 0; p < k; ++p) acc += a_row[p * stride_a] * b[p * ldb + j];
    c[j] = acc;
  }
}

inline void gemm_rows(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t row_step,
                      std::size_t stride_a, const double* b, std::size_t ldb, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* a_row = a + i * row_step;
    double* ci = c + i * ldc;
    std::size_t j = 0;
    for (; j + 16 <= n; j += 16) row_block16(k, a_row, stride_a, b + j, ldb, ci + j);
    for (; j + 4 <= n; j += 4) row_block4(k, a_row, stride_a, b + j, ldb, ci + j);
    if (j < n) row_tail(k, a_row, stride_a, b + j, ldb, ci + j, n - j);
  }
}

void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
             std::size_t ldb, double* c, std::size_t ldc) {
  gemm_rows(m, n, k, a, lda, 1, b, ldb, c, ldc);
}

void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda, const double* b,
             std::size_t ldb, double* c, std::size_t ldc) {
  gemm_rows(m, n, k, a, 1, lda, b, ldb, c, ldc);
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_mul_pd(av, _mm256_loadu_pd(x + j))));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

void mul_acc(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j));
    _mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), prod));
  }
  for (; j < n; ++j) out[j] += x[j] * y[j];
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::avx2, gemm_nn, gemm_tn, axpy, mul_acc};
  return &table;
}

}  // namespace lgcl::kernels
