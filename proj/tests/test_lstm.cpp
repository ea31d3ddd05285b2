#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <vector>

#include "ad/graph.hpp"
#include "common/errors.hpp"
#include "common/rng.hpp"
#include "nn/model.hpp"

using namespace pglake;
using nn::AnnParams;
using nn::LstmParams;
using nn::LstmState;
using nn::Normalization;

namespace {

// Independent straight-line reimplementation of the cell equations on plain
// doubles, used as the oracle for the graph-built cell.
LstmState scalar_cell_oracle(const std::vector<double>& x, const LstmState& s,
                             const LstmParams& p) {
  const std::size_t hidden = p.hidden_size();
  auto affine = [&](const ad::Tensor& wh, const ad::Tensor& wx, const ad::Tensor& b,
                    std::size_t i) {
    double acc = b[i];
    for (std::size_t j = 0; j < hidden; ++j) acc += wh(i, j) * s.h[j];
    for (std::size_t j = 0; j < x.size(); ++j) acc += wx(i, j) * x[j];
    return acc;
  };
  auto sigmoid = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  LstmState out;
  out.h.resize(hidden);
  out.c.resize(hidden);
  for (std::size_t i = 0; i < hidden; ++i) {
    const double candidate = std::tanh(affine(p.Wc_h, p.Wc_x, p.bc, i));
    const double forget = sigmoid(affine(p.Wf_h, p.Wf_x, p.bf, i));
    const double input = sigmoid(affine(p.Wg_h, p.Wg_x, p.bg, i));
    const double output = sigmoid(affine(p.Wo_h, p.Wo_x, p.bo, i));
    out.c[i] = forget * s.c[i] + input * candidate;
    out.h[i] = output * std::tanh(out.c[i]);
  }
  return out;
}

LstmParams zero_params(std::size_t hidden, std::size_t input, std::size_t output) {
  Rng rng(0);
  LstmParams p = LstmParams::init(hidden, input, output, rng);
  for (ad::Tensor* t : p.tensors())
    for (auto& v : t->data()) v = 0.0;
  return p;
}

ad::Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                         double hi = 1.0) {
  ad::Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

}  // namespace

TEST_CASE("zero parameters and zero state give a zero cell output") {
  const LstmParams p = zero_params(4, 3, 2);
  const LstmState out = nn::lstm_cell({0, 0, 0}, {{0, 0, 0, 0}, {0, 0, 0, 0}}, p);
  for (double v : out.h) CHECK(v == 0.0);
  for (double v : out.c) CHECK(v == 0.0);
}

TEST_CASE("zero parameters halve a nonzero cell state") {
  const LstmParams p = zero_params(3, 2, 1);
  const std::vector<double> c0 = {0.8, -1.2, 2.0};
  const LstmState out = nn::lstm_cell({0.5, -0.5}, {{0, 0, 0}, c0}, p);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(out.c[i] == doctest::Approx(0.5 * c0[i]).epsilon(1e-15));
    CHECK(out.h[i] == doctest::Approx(0.5 * std::tanh(0.5 * c0[i])).epsilon(1e-15));
  }
}

TEST_CASE("one seeded step matches the straight-line scalar oracle") {
  Rng rng(321);
  LstmParams p = LstmParams::init(3, 2, 2, rng);
  const std::vector<double> x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  LstmState s;
  for (int i = 0; i < 3; ++i) {
    s.h.push_back(rng.uniform(-1, 1));
    s.c.push_back(rng.uniform(-1, 1));
  }
  const LstmState got = nn::lstm_cell(x, s, p);
  const LstmState want = scalar_cell_oracle(x, s, p);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(got.h[i] == doctest::Approx(want.h[i]).epsilon(1e-12));
    CHECK(got.c[i] == doctest::Approx(want.c[i]).epsilon(1e-12));
  }
}

TEST_CASE("cell rejects mismatched dimensions") {
  const LstmParams p = zero_params(3, 2, 1);
  CHECK_THROWS_AS(nn::lstm_cell({1.0}, {{0, 0, 0}, {0, 0, 0}}, p), ShapeError);
  CHECK_THROWS_AS(nn::lstm_cell({1.0, 2.0}, {{0, 0}, {0, 0}}, p), ShapeError);
}

TEST_CASE("unroll with one step equals one cell call") {
  Rng rng(11);
  LstmParams p = LstmParams::init(4, 3, 2, rng);
  ad::Tensor x(1, 3, {0.3, -0.7, 1.1});
  const auto hs = nn::unroll(x, p);
  REQUIRE(hs.size() == 1);
  const LstmState one = nn::lstm_cell({0.3, -0.7, 1.1}, {{0, 0, 0, 0}, {0, 0, 0, 0}}, p);
  CHECK(hs[0] == one.h);
}

TEST_CASE("unroll with zero parameters stays at zero") {
  const LstmParams p = zero_params(3, 2, 1);
  Rng rng(9);
  const ad::Tensor x = random_matrix(10, 2, rng);
  for (const auto& h : nn::unroll(x, p))
    for (double v : h) CHECK(v == 0.0);
}

TEST_CASE("T=50 unroll gradients pass grad_check") {
  Rng rng(4242);
  LstmParams p = LstmParams::init(8, 5, 3, rng);
  const ad::Tensor x = random_matrix(50, 5, rng);

  ad::Graph g;
  const nn::LstmNodes nodes = register_lstm(g, p, true);
  const auto out = unroll_lstm(g, nodes, x);
  const auto loss = g.mean(out.hidden.back());
  CHECK(g.grad_check(loss, 1e-5) < 1e-5);
}

TEST_CASE("gate outputs stay inside their ranges") {
  Rng rng(88);
  LstmParams p = LstmParams::init(6, 4, 2, rng);
  for (ad::Tensor* t : p.tensors())
    for (auto& v : t->data()) v *= 40.0;  // push pre-activations hard
  const ad::Tensor x = random_matrix(20, 4, rng, -50.0, 50.0);
  LstmState s{std::vector<double>(6, 0.0), std::vector<double>(6, 0.0)};
  for (std::size_t t = 0; t < x.rows(); ++t) {
    std::vector<double> xt(4);
    for (std::size_t j = 0; j < 4; ++j) xt[j] = x(t, j);
    s = nn::lstm_cell(xt, s, p);
    for (double v : s.h) CHECK(std::fabs(v) < 1.0);  // |o|<1 and |tanh(c)|<1
  }
}

TEST_CASE("saturating forget and input biases carry the cell state exactly") {
  Rng rng(77);
  LstmParams p = LstmParams::init(5, 3, 2, rng);
  for (auto& v : p.bf.data()) v = 500.0;   // forget gate pinned at 1
  for (auto& v : p.bg.data()) v = -500.0;  // input gate pinned at (effectively) 0
  const std::vector<double> c0 = {1.5, -0.25, 0.75, 2.0, -1.0};
  LstmState s{std::vector<double>(5, 0.0), c0};
  const ad::Tensor x = random_matrix(30, 3, rng);
  for (std::size_t t = 0; t < x.rows(); ++t) {
    std::vector<double> xt(3);
    for (std::size_t j = 0; j < 3; ++j) xt[j] = x(t, j);
    s = nn::lstm_cell(xt, s, p);
  }
  CHECK(s.c == c0);  // exact carry
}

TEST_CASE("unroll is causal") {
  Rng rng(31);
  LstmParams p = LstmParams::init(4, 3, 2, rng);
  ad::Tensor x = random_matrix(12, 3, rng);
  const auto base = nn::unroll(x, p);
  x(7, 1) += 0.5;
  const auto bumped = nn::unroll(x, p);
  for (std::size_t t = 0; t < 7; ++t) CHECK(base[t] == bumped[t]);
  CHECK(base[7] != bumped[7]);
}

TEST_CASE("predict_profile applies the affine head and de-normalization") {
  Rng rng(3);
  LstmParams p = LstmParams::init(4, 2, 3, rng);
  Normalization norm = Normalization::identity(2, 3);

  SUBCASE("zero head weights give the constant bias profile") {
    for (auto& v : p.Whead.data()) v = 0.0;
    p.bhead = ad::Tensor(3, 1, {1.0, 2.0, 3.0});
    norm.y_mean = ad::Tensor(3, 1, {10.0, 20.0, 30.0});
    norm.y_std = ad::Tensor(3, 1, {2.0, 2.0, 2.0});
    const auto out = nn::predict_profile({0.5, -0.5, 0.25, 0.0}, p, norm);
    CHECK(out == std::vector<double>{12.0, 24.0, 36.0});
  }
  SUBCASE("hand-computed 2x2 head") {
    Rng r2(4);
    LstmParams q = LstmParams::init(2, 2, 2, r2);
    q.Whead = ad::Tensor(2, 2, {1.0, 0.0, 0.0, 1.0});
    q.bhead = ad::Tensor(2, 1, {0.5, -0.5});
    const auto out = nn::predict_profile({2.0, 3.0}, q, Normalization::identity(2, 2));
    CHECK(out == std::vector<double>{2.5, 2.5});
  }
  SUBCASE("output length is always n_depths") {
    const auto out = nn::predict_profile({0.1, 0.2, 0.3, 0.4}, p, Normalization::identity(2, 3));
    CHECK(out.size() == 3);
  }
  SUBCASE("missing statistics are rejected") {
    CHECK_THROWS_AS(nn::predict_profile({0.1, 0.2, 0.3, 0.4}, p, Normalization{}), ConfigError);
  }
}

TEST_CASE("ann_forward basics") {
  Rng rng(15);
  SUBCASE("zero parameters give zero output") {
    AnnParams p = AnnParams::init(4, 3, 2, rng);
    for (ad::Tensor* t : p.tensors())
      for (auto& v : t->data()) v = 0.0;
    CHECK(nn::ann_forward({1.0, -2.0, 3.0}, p) == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("seeded case matches a straight-line oracle") {
    AnnParams p = AnnParams::init(3, 2, 2, rng);
    const std::vector<double> x = {0.4, -1.1};
    std::vector<double> hidden(3), want(2);
    for (std::size_t i = 0; i < 3; ++i) {
      double acc = p.b1[i];
      for (std::size_t j = 0; j < 2; ++j) acc += p.W1(i, j) * x[j];
      hidden[i] = std::tanh(acc);
    }
    for (std::size_t i = 0; i < 2; ++i) {
      double acc = p.b2[i];
      for (std::size_t j = 0; j < 3; ++j) acc += p.W2(i, j) * hidden[j];
      want[i] = acc;
    }
    const auto got = nn::ann_forward(x, p);
    for (std::size_t i = 0; i < 2; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
}

TEST_CASE("ann is permutation-invariant over time, lstm is not") {
  Rng rng(23);
  const ad::Tensor x = random_matrix(8, 3, rng);
  ad::Tensor x_rev(8, 3);
  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t j = 0; j < 3; ++j) x_rev(t, j) = x(7 - t, j);

  AnnParams ann = AnnParams::init(5, 3, 2, rng);
  ad::Graph ga1, ga2;
  const auto pa1 = ann_forward_node(ga1, register_ann(ga1, ann, false), x);
  const auto pa2 = ann_forward_node(ga2, register_ann(ga2, ann, false), x_rev);
  for (std::size_t t = 0; t < 8; ++t)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(ga1.value(pa1)(t, j) == ga2.value(pa2)(7 - t, j));

  LstmParams lstm = LstmParams::init(5, 3, 2, rng);
  ad::Graph gl1, gl2;
  const auto pl1 = unroll_lstm(gl1, register_lstm(gl1, lstm, false), x).pred_norm;
  const auto pl2 = unroll_lstm(gl2, register_lstm(gl2, lstm, false), x_rev).pred_norm;
  double max_diff = 0.0;
  for (std::size_t j = 0; j < 2; ++j)
    max_diff = std::max(max_diff, std::fabs(gl1.value(pl1)(7, j) - gl2.value(pl2)(0, j)));
  CHECK(max_diff > 1e-6);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  Rng rng(99);
  nn::Model model;
  model.variant = nn::Variant::kPgrnn;
  model.lstm = LstmParams::init(6, 7, 4, rng);
  model.norm.x_mean = random_matrix(7, 1, rng);
  model.norm.x_std = random_matrix(7, 1, rng, 0.5, 2.0);
  model.norm.y_mean = random_matrix(4, 1, rng);
  model.norm.y_std = random_matrix(4, 1, rng, 0.5, 2.0);

  const std::string path = "/tmp/pglake_test_ckpt.bin";
  nn::save_checkpoint(model, path);
  nn::Model loaded = nn::load_checkpoint(path);

  CHECK(loaded.variant == model.variant);
  const auto a = model.lstm.named_tensors();
  const auto b = loaded.lstm.named_tensors();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(*a[i].second == *b[i].second);
  CHECK(loaded.norm.x_mean == model.norm.x_mean);
  CHECK(loaded.norm.x_std == model.norm.x_std);
  CHECK(loaded.norm.y_mean == model.norm.y_mean);
  CHECK(loaded.norm.y_std == model.norm.y_std);
  std::remove(path.c_str());

  SUBCASE("ann checkpoints too") {
    nn::Model m2;
    m2.variant = nn::Variant::kAnn;
    m2.ann = AnnParams::init(3, 2, 1, rng);
    m2.norm = Normalization::identity(2, 1);
    nn::save_checkpoint(m2, path);
    nn::Model l2 = nn::load_checkpoint(path);
    CHECK(l2.variant == nn::Variant::kAnn);
    CHECK(l2.ann.W1 == m2.ann.W1);
    std::remove(path.c_str());
  }

  SUBCASE("missing file is an io error") {
    CHECK_THROWS_AS(nn::load_checkpoint("/tmp/pglake_no_such_ckpt.bin"), IoError);
  }
}
