#include <cmath>
#include <functional>
#include <limits>

#include "doctest.h"
#include "helpers.hpp"
#include "lgcl/autodiff.hpp"
#include "lgcl/checkpoint.hpp"
#include "lgcl/error.hpp"
#include "lgcl/gradcheck.hpp"
#include "lgcl/optim.hpp"
#include "primitive_cases.hpp"

using namespace lgcl;
using namespace lgcl::ad;

using namespace testutil;

TEST_CASE("every primitive passes central finite differences over 20 seeded cases") {
  for (const auto& pc : primitive_cases()) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto report = check_primitive(pc, seed);
      INFO(pc.name << " seed " << seed << ": " << report.describe());
      CHECK(report.passed);
      CHECK(report.entries_nonsmooth == 0);
    }
  }
}

TEST_CASE("worked examples for primitives") {
  Tape t;
  Var m = t.constant(Tensor::from_rows({{1, 2}, {3, 4}}));
  CHECK(matmul(m, t.constant(Tensor::identity(2))).value() == m.value());

  Var x = t.variable(Tensor::from_rows({{-1, 2}}));
  Var r = relu(x);
  CHECK(r.value() == Tensor::from_rows({{0, 2}}));
  t.backward(sum(r));
  CHECK(t.grad(x) == Tensor::from_rows({{0, 1}}));

  Tape t2;
  Var three = t2.variable(Tensor::from_rows({{1, 1}, {2, 2}, {3, 3}}));
  const std::size_t idx[] = {2, 0};
  Var sel = gather_rows(three, idx);
  CHECK(sel.value() == Tensor::from_rows({{3, 3}, {1, 1}}));
  t2.backward(sum(mul(sel, t2.constant(Tensor::from_rows({{1, 2}, {3, 4}})))));
  CHECK(t2.grad(three) == Tensor::from_rows({{3, 4}, {0, 0}, {1, 2}}));

  Tape t3;
  auto cs = [&](std::initializer_list<double> a, std::initializer_list<double> b) {
    return cosine_similarity(t3.constant(Tensor::from_rows({a})), t3.constant(Tensor::from_rows({b}))).scalar();
  };
  CHECK(cs({1, 0}, {1, 0}) == 1.0);
  CHECK(cs({1, 0}, {0, 1}) == 0.0);
  CHECK(std::abs(cs({1, 1}, {1, 0}) - 1.0 / std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("fan-out accumulates gradients") {
  // f(x) = sum(x * x + 3x) -> df/dx = 2x + 3
  Tape t;
  Var x = t.variable(Tensor::from_rows({{1, -2, 0.5}}));
  Var f = sum(add(mul(x, x), scale(x, 3.0)));
  t.backward(f);
  CHECK(t.grad(x) == Tensor::from_rows({{5, -1, 4}}));
  // running backward twice gives the same answer (gradients are reset)
  t.backward(f);
  CHECK(t.grad(x) == Tensor::from_rows({{5, -1, 4}}));
}

TEST_CASE("shape errors name both shapes") {
  Tape t;
  Var a = t.constant(Tensor(2, 3));
  Var b = t.constant(Tensor(2, 3));
  try {
    matmul(a, b);
    FAIL("expected invalid_argument");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("(2x3)") != std::string::npos);
  }
  CHECK_THROWS_AS(add(a, t.constant(Tensor(3, 3))), std::invalid_argument);
  CHECK_THROWS_AS(t.backward(a), std::invalid_argument);
}

TEST_CASE("checked mode rejects non-finite values and zero norms") {
  set_checked_mode(true);
  {
    Tape t;
    Var x = t.constant(Tensor::from_rows({{-1.0}}));
    CHECK_THROWS_AS(log(x), NumericError);
    Var z = t.constant(Tensor(1, 2));
    CHECK_THROWS_AS(normalize_rows(z), NumericError);
    CHECK_THROWS_AS(cosine_similarity(z, t.constant(Tensor::from_rows({{1, 0}}))), NumericError);
  }
  set_checked_mode(false);
  Tape t;
  Var z = t.constant(Tensor(1, 2));
  CHECK(cosine_similarity(z, t.constant(Tensor::from_rows({{1, 0}}))).scalar() == 0.0);
  CHECK(normalize_rows(z).value() == Tensor(1, 2));
}

TEST_CASE("bce_with_logits is stable at saturation") {
  Tape t;
  auto loss = [&](double logit, double label) {
    return bce_with_logits(t.constant(Tensor(1, 1, logit)), Tensor(1, 1, label)).scalar();
  };
  CHECK(std::abs(loss(0, 1) - std::log(2.0)) < 1e-15);
  CHECK(loss(20, 1) < 1e-8);
  CHECK(std::abs(loss(-20, 1) - 20.0) < 1e-6);
  CHECK(std::isfinite(loss(-800, 1)));
}

TEST_CASE("normalized adjacency operators") {
  auto g = testutil::random_graph(30, 0.2, 4);
  auto rn = row_normalized_adjacency(g);
  auto dense = rn.to_dense();
  for (std::size_t i = 0; i < dense.rows(); ++i) {
    double s = 0;
    for (double v : dense.row(i)) s += v;
    CHECK(std::abs(s - 1.0) < 1e-14);
    CHECK(dense(i, i) == 1.0 / static_cast<double>(g.degree(static_cast<NodeId>(i)) + 1));
  }
  auto sym = symmetric_normalized_adjacency(g).to_dense();
  for (std::size_t i = 0; i < sym.rows(); ++i) {
    for (std::size_t j = 0; j < sym.cols(); ++j) CHECK(sym(i, j) == sym(j, i));
  }
  // no edges: D^-1 (A + I) = I, and a triangle is symmetric in every row
  auto empty = testutil::make_graph(2, {});
  CHECK(row_normalized_adjacency(empty).to_dense() == Tensor::identity(2));
  auto tri = symmetric_normalized_adjacency(testutil::make_graph(3, {{0, 1}, {1, 2}, {0, 2}})).to_dense();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(tri(i, j) - 1.0 / 3.0) < 1e-15);
  }
}

TEST_CASE("forward is bit-deterministic") {
  Rng rng(5);
  const Tensor a = random_tensor(7, 9, rng), b = random_tensor(9, 4, rng);
  auto run = [&] {
    Tape t;
    return tanh(matmul(t.constant(a), t.constant(b))).value();
  };
  CHECK(run() == run());
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  Tensor p = Tensor::from_rows({{1.5, -2.0}});
  const Tensor before = p;
  Adam adam;
  Tensor* params[] = {&p};
  const Tensor grads[] = {Tensor(1, 2)};
  for (int i = 0; i < 3; ++i) CHECK(adam.step(params, grads));
  CHECK(p == before);
}

TEST_CASE("adam: first step moves by about lr against the gradient sign") {
  Tensor p = Tensor::from_rows({{0.0, 0.0}});
  Adam adam(AdamOptions{.lr = 0.1});
  Tensor* params[] = {&p};
  const Tensor grads[] = {Tensor::from_rows({{2.5, -0.3}})};
  adam.step(params, grads);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps)
  CHECK(std::abs(p(0, 0) + 0.1) < 1e-8);
  CHECK(std::abs(p(0, 1) - 0.1) < 1e-7);
}

TEST_CASE("adam: non-finite gradients are skipped or fatal") {
  Tensor p = Tensor::from_rows({{1.0}});
  Tensor* params[] = {&p};
  const Tensor bad[] = {Tensor(1, 1, std::numeric_limits<double>::quiet_NaN())};
  Adam skip;
  CHECK_FALSE(skip.step(params, bad));
  CHECK(skip.steps_skipped() == 1);
  CHECK(p(0, 0) == 1.0);
  Adam strict(AdamOptions{.fail_on_nonfinite = true});
  CHECK_THROWS_AS(strict.step(params, bad), NumericError);
}

TEST_CASE("adam: identical runs give identical parameters") {
  auto run = [] {
    Rng rng(3);
    Tensor p = random_tensor(3, 3, rng);
    Adam adam;
    Tensor* params[] = {&p};
    for (int i = 0; i < 10; ++i) {
      const Tensor g[] = {random_tensor(3, 3, rng)};
      adam.step(params, g);
    }
    return p;
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip is exact") {
  testutil::TempDir dir("ckpt");
  Rng rng(8);
  Checkpoint c;
  c.meta["note"] = "two words";
  c.tensors.emplace_back("w", random_tensor(3, 4, rng));
  c.tensors.emplace_back("b", Tensor::from_rows({{1e-300, -0.0, 1.0 / 3.0}}));
  save_checkpoint(dir / "c.ckpt", c);
  auto back = load_checkpoint(dir / "c.ckpt");
  CHECK(back.meta == c.meta);
  REQUIRE(back.tensors.size() == 2);
  CHECK(back.tensor("w") == c.tensor("w"));
  CHECK(back.tensor("b") == c.tensor("b"));
  CHECK_THROWS_AS(back.tensor("missing"), DataError);
  testutil::write_file(dir / "bad.ckpt", "not a checkpoint\n");
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), DataError);
}
