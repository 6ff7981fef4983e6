#include <cstring>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "lgcl/kernels.hpp"
#include "lgcl/model.hpp"

using namespace lgcl;
using namespace lgcl::kernels;

namespace {

std::vector<double> random_values(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Restores the dispatcher choice after a test pins one.
struct IsaGuard {
  Isa saved = active().isa;
  ~IsaGuard() { force_isa(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match a plain loop") {
  Rng rng(1);
  const KernelTable& s = scalar_table();
  for (int t = 0; t < 20; ++t) {
    const std::size_t m = 1 + rng.uniform_index(9), n = 1 + rng.uniform_index(9), k = 1 + rng.uniform_index(9);
    auto a = random_values(m * k, rng), b = random_values(k * n, rng), c = random_values(m * n, rng);
    auto expect = c;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = expect[i * n + j];
        for (std::size_t p = 0; p < k; ++p) acc += a[i * k + p] * b[p * n + j];
        expect[i * n + j] = acc;
      }
    }
    s.gemm_nn(m, n, k, a.data(), k, b.data(), n, c.data(), n);
    CHECK(same_bits(c, expect));
  }
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  const KernelTable* v = avx2_table();
  if (v == nullptr || !cpu_supports(Isa::avx2)) {
    MESSAGE("avx2 variant unavailable on this machine; skipped");
    return;
  }
  const KernelTable& s = scalar_table();
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = 1 + rng.uniform_index(12), n = 1 + rng.uniform_index(70), k = 1 + rng.uniform_index(40);
    const std::size_t lda = k + rng.uniform_index(3), ldb = n + rng.uniform_index(3), ldc = n + rng.uniform_index(3);
    auto a = random_values(m * lda, rng), b = random_values(k * ldb, rng), c0 = random_values(m * ldc, rng);
    auto c1 = c0, c2 = c0;
    s.gemm_nn(m, n, k, a.data(), lda, b.data(), ldb, c1.data(), ldc);
    v->gemm_nn(m, n, k, a.data(), lda, b.data(), ldb, c2.data(), ldc);
    CHECK(same_bits(c1, c2));

    // gemm_tn reads A as k x m
    const std::size_t ldt = m + rng.uniform_index(3);
    auto at = random_values(k * ldt, rng);
    auto d1 = c0, d2 = c0;
    s.gemm_tn(m, n, k, at.data(), ldt, b.data(), ldb, d1.data(), ldc);
    v->gemm_tn(m, n, k, at.data(), ldt, b.data(), ldb, d2.data(), ldc);
    CHECK(same_bits(d1, d2));

    auto x = random_values(n, rng), y = random_values(n, rng), y1 = y, y2 = y;
    const double alpha = rng.uniform(-1, 1);
    s.axpy(n, alpha, x.data(), y1.data());
    v->axpy(n, alpha, x.data(), y2.data());
    CHECK(same_bits(y1, y2));
    auto z = random_values(n, rng), o1 = y, o2 = y;
    s.mul_acc(n, x.data(), z.data(), o1.data());
    v->mul_acc(n, x.data(), z.data(), o2.data());
    CHECK(same_bits(o1, o2));
  }
}

TEST_CASE("model forward is identical under either kernel table") {
  if (avx2_table() == nullptr || !cpu_supports(Isa::avx2)) return;
  IsaGuard guard;
  LGCLConfig cfg;
  cfg.sortpool_k = 10;
  auto g = testutil::random_graph(40, 0.12, 5);
  auto sg = make_subgraph(g, g.edges()[3], cfg.subgraph_options(), 1);
  auto params = ModelParams::initialize(cfg, feature_width(cfg.max_label, cfg.features), 9);
  force_isa(Isa::scalar);
  auto a = encode_subgraph(params, cfg, sg);
  force_isa(Isa::avx2);
  auto b = encode_subgraph(params, cfg, sg);
  CHECK(a.pooled == b.pooled);
  CHECK(std::memcmp(&a.logit, &b.logit, sizeof(double)) == 0);
}

TEST_CASE("to_string names") {
  CHECK(to_string(Isa::scalar) == "scalar");
  CHECK(to_string(Isa::avx2) == "avx2");
}
