#include <doctest.h>

#include <cmath>
#include <vector>

#include "ad/graph.hpp"
#include "ad/tensor.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"

using pglake::NumericError;
using pglake::Rng;
using pglake::ShapeError;
using pglake::ad::Graph;
using pglake::ad::Tensor;

namespace {

Tensor random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double lo = -2.0,
                     double hi = 2.0) {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Random values bounded away from zero (for kink-free relu/abs/div checks).
Tensor random_away_from_zero(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double mag = rng.uniform(1e-3, 2.0);
    t[i] = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

}  // namespace

TEST_CASE("tensor invariants") {
  Tensor t(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t(1, 2) == 6);
  CHECK_THROWS_AS(Tensor(2, 3, {1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(Tensor(0, 3), ShapeError);
  CHECK(Tensor::scalar(7.0).item() == 7.0);
  CHECK_THROWS_AS(t.item(), ShapeError);
}

TEST_CASE("tanh of the zero vector is the zero vector") {
  Graph g;
  const auto x = g.constant(Tensor(4, 1));
  const auto y = g.tanh(x);
  for (double v : g.value(y).data()) CHECK(v == 0.0);
}

TEST_CASE("sigmoid of the zero vector is all 0.5") {
  Graph g;
  const auto x = g.constant(Tensor(5, 1));
  const auto y = g.sigmoid(x);
  for (double v : g.value(y).data()) CHECK(v == 0.5);
}

TEST_CASE("matmul matches a scalar triple-loop oracle") {
  Rng rng(91);
  const Tensor a = random_tensor(2, 3, rng);
  const Tensor b = random_tensor(3, 1, rng);
  Graph g;
  const auto c = g.matmul(g.constant(a), g.constant(b));

  Tensor expect(2, 1);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 1; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < 3; ++k) acc += a(i, k) * b(k, j);
      expect(i, j) = acc;
    }
  CHECK(g.value(c) == expect);
}

TEST_CASE("shape mismatches are rejected naming both shapes") {
  Graph g;
  const auto a = g.constant(Tensor(2, 3));
  const auto b = g.constant(Tensor(2, 3));
  CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("(2x3)"), ShapeError);
  const auto c = g.constant(Tensor(3, 1));
  CHECK_THROWS_WITH_AS(g.add(a, c), doctest::Contains("(3x1)"), ShapeError);
}

TEST_CASE("non-finite values are rejected naming the node") {
  Graph g;
  const auto a = g.constant(Tensor(1, 1, {2.0}));
  const auto b = g.constant(Tensor(1, 1, {0.0}));
  CHECK_THROWS_WITH_AS(g.div(a, b), doctest::Contains("div"), NumericError);
  CHECK_THROWS_AS(g.parameter(Tensor(1, 1, {std::nan("")})), NumericError);
}

TEST_CASE("backward of sum(w) is all ones") {
  Graph g;
  Rng rng(7);
  const auto w = g.parameter(random_tensor(3, 2, rng));
  g.backward(g.sum(w));
  for (double v : g.grad(w).data()) CHECK(v == 1.0);
}

TEST_CASE("backward of sum(tanh(w)) at w=0 is all ones") {
  Graph g;
  const auto w = g.parameter(Tensor(4, 1));
  g.backward(g.sum(g.tanh(w)));
  for (double v : g.grad(w).data()) CHECK(v == 1.0);
}

TEST_CASE("backward requires a scalar loss") {
  Graph g;
  const auto w = g.parameter(Tensor(2, 2));
  CHECK_THROWS_AS(g.backward(g.square(w)), ShapeError);
}

TEST_CASE("three-step composite gradient matches central differences") {
  Rng rng(1234);
  Graph g;
  const auto w = g.parameter(random_tensor(3, 4, rng), "w");
  const auto x = g.constant(random_tensor(4, 2, rng), "x");
  const auto loss = g.mean(g.sigmoid(g.matmul(w, x)));
  CHECK(g.grad_check(loss, 1e-5) < 1e-6);
}

TEST_CASE("grad_check on a single sigmoid at zero") {
  Graph g;
  const auto w = g.parameter(Tensor(1, 1));
  const auto loss = g.sum(g.sigmoid(w));
  g.backward(loss);
  CHECK(g.grad(w)[0] == 0.25);  // sigma'(0)
  CHECK(g.grad_check(loss, 1e-5) < 1e-8);
}

TEST_CASE("grad_check on a zero-parameter graph is zero") {
  Graph g;
  const auto x = g.constant(Tensor(3, 1, {1, 2, 3}));
  const auto loss = g.mean(x);
  CHECK(g.grad_check(loss, 1e-5) == 0.0);
}

TEST_CASE("grad_check rejects epsilon outside (0, 1e-2]") {
  Graph g;
  const auto w = g.parameter(Tensor(1, 1));
  const auto loss = g.sum(w);
  CHECK_THROWS_AS(g.grad_check(loss, 0.0), pglake::ConfigError);
  CHECK_THROWS_AS(g.grad_check(loss, 0.5), pglake::ConfigError);
}

TEST_CASE("every primitive passes finite-difference checks at seeded points") {
  // 100 points per primitive (10x10 leaves), kink-free where needed.
  Rng rng(2024);

  auto check = [](Graph& g, Graph::NodeId loss) { CHECK(g.grad_check(loss, 1e-5) < 1e-6); };

  SUBCASE("tanh") {
    Graph g;
    const auto w = g.parameter(random_tensor(10, 10, rng));
    check(g, g.mean(g.tanh(w)));
  }
  SUBCASE("sigmoid") {
    Graph g;
    const auto w = g.parameter(random_tensor(10, 10, rng));
    check(g, g.mean(g.sigmoid(w)));
  }
  SUBCASE("square") {
    Graph g;
    const auto w = g.parameter(random_tensor(10, 10, rng));
    check(g, g.mean(g.square(w)));
  }
  SUBCASE("relu away from the kink") {
    Graph g;
    const auto w = g.parameter(random_away_from_zero(10, 10, rng));
    check(g, g.mean(g.relu(w)));
  }
  SUBCASE("abs away from the kink") {
    Graph g;
    const auto w = g.parameter(random_away_from_zero(10, 10, rng));
    check(g, g.mean(g.abs(w)));
  }
  SUBCASE("scale and add_scalar") {
    Graph g;
    const auto w = g.parameter(random_tensor(10, 10, rng));
    check(g, g.mean(g.add_scalar(g.scale(w, -1.7), 0.3)));
  }
  SUBCASE("add sub mul") {
    Graph g;
    const auto a = g.parameter(random_tensor(10, 10, rng));
    const auto b = g.parameter(random_tensor(10, 10, rng));
    check(g, g.mean(g.mul(g.add(a, b), g.sub(a, b))));
  }
  SUBCASE("div with denominator away from zero") {
    Graph g;
    const auto a = g.parameter(random_tensor(10, 10, rng));
    Tensor denom = random_away_from_zero(10, 10, rng);
    for (std::size_t i = 0; i < denom.size(); ++i)
      denom[i] = (denom[i] < 0 ? -1.0 : 1.0) * (std::fabs(denom[i]) + 0.5);
    const auto b = g.parameter(denom);
    check(g, g.mean(g.div(a, b)));
  }
  SUBCASE("matmul both sides") {
    Graph g;
    const auto a = g.parameter(random_tensor(5, 7, rng));
    const auto b = g.parameter(random_tensor(7, 4, rng));
    check(g, g.mean(g.matmul(a, b)));
  }
  SUBCASE("transpose concat slice") {
    Graph g;
    const auto a = g.parameter(random_tensor(3, 4, rng));
    const auto b = g.parameter(random_tensor(2, 4, rng));
    const auto cat = g.concat_rows({a, b});
    const auto cut = g.slice(cat, 1, 4, 0, 3);
    check(g, g.mean(g.transpose(cut)));
  }
  SUBCASE("sum and mean") {
    Graph g;
    const auto a = g.parameter(random_tensor(6, 6, rng));
    check(g, g.add(g.sum(g.square(a)), g.mean(a)));
  }
}

TEST_CASE("duplicated use of a leaf accumulates by the sum rule") {
  Rng rng(5);
  const Tensor w0 = random_tensor(3, 3, rng);

  Graph g1;
  const auto w1 = g1.parameter(w0);
  g1.backward(g1.sum(g1.add(w1, w1)));  // x + x

  Graph g2;
  const auto w2 = g2.parameter(w0);
  g2.backward(g2.sum(g2.scale(w2, 2.0)));  // 2x

  CHECK(g1.grad(w1) == g2.grad(w2));
}

TEST_CASE("forward evaluation is deterministic") {
  auto build = [] {
    Rng rng(77);
    Graph g;
    const auto w = g.parameter(random_tensor(4, 4, rng));
    const auto x = g.constant(random_tensor(4, 1, rng));
    return g.value(g.tanh(g.matmul(w, x))).data();
  };
  const auto a = build();
  const auto b = build();
  CHECK(a == b);
}

TEST_CASE("slice rejects out-of-bounds windows") {
  Graph g;
  const auto a = g.constant(Tensor(3, 3));
  CHECK_THROWS_AS(g.slice(a, 0, 4, 0, 1), ShapeError);
  CHECK_THROWS_AS(g.slice(a, 2, 2, 0, 1), ShapeError);
}

TEST_CASE("set_value and recompute re-evaluate the same records") {
  Graph g;
  const auto w = g.parameter(Tensor(1, 1, {1.0}));
  const auto y = g.square(w);
  CHECK(g.value(y).item() == 1.0);
  g.set_value(w, Tensor(1, 1, {3.0}));
  g.recompute();
  CHECK(g.value(y).item() == 9.0);
  CHECK_THROWS_AS(g.set_value(w, Tensor(2, 1)), ShapeError);
  CHECK_THROWS_AS(g.set_value(y, Tensor(1, 1)), ShapeError);
}
