#include "nn/model.hpp"

#include <cmath>
#include <utility>

#include "common/errors.hpp"

namespace pglake::nn {

namespace {

ad::Tensor uniform_tensor(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  ad::Tensor t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

void require_matching(const ad::Tensor& t, std::size_t rows, std::size_t cols,
                      const char* name) {
  if (t.rows() != rows || t.cols() != cols)
    throw ShapeError(std::string("parameter ") + name + " has shape " + t.shape_str() +
                     ", expected (" + std::to_string(rows) + "x" + std::to_string(cols) + ")");
  if (!t.all_finite()) throw NumericError(std::string("parameter ") + name + " is non-finite");
}

}  // namespace

LstmParams LstmParams::init(std::size_t hidden, std::size_t input, std::size_t output,
                            Rng& rng) {
  if (hidden == 0 || input == 0 || output == 0)
    throw ConfigError("lstm sizes must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  LstmParams p;
  p.Wc_h = uniform_tensor(hidden, hidden, bound, rng);
  p.Wc_x = uniform_tensor(hidden, input, bound, rng);
  p.bc = ad::Tensor(hidden, 1);
  p.Wf_h = uniform_tensor(hidden, hidden, bound, rng);
  p.Wf_x = uniform_tensor(hidden, input, bound, rng);
  p.bf = ad::Tensor::full(hidden, 1, 1.0);
  p.Wg_h = uniform_tensor(hidden, hidden, bound, rng);
  p.Wg_x = uniform_tensor(hidden, input, bound, rng);
  p.bg = ad::Tensor(hidden, 1);
  p.Wo_h = uniform_tensor(hidden, hidden, bound, rng);
  p.Wo_x = uniform_tensor(hidden, input, bound, rng);
  p.bo = ad::Tensor(hidden, 1);
  p.Whead = uniform_tensor(output, hidden, bound, rng);
  p.bhead = ad::Tensor(output, 1);
  return p;
}

std::vector<ad::Tensor*> LstmParams::tensors() {
  return {&Wc_h, &Wc_x, &bc, &Wf_h, &Wf_x, &bf, &Wg_h, &Wg_x,
          &bg,   &Wo_h, &Wo_x, &bo, &Whead, &bhead};
}

std::vector<std::pair<std::string, ad::Tensor*>> LstmParams::named_tensors() {
  return {{"lstm.Wc_h", &Wc_h}, {"lstm.Wc_x", &Wc_x}, {"lstm.bc", &bc},
          {"lstm.Wf_h", &Wf_h}, {"lstm.Wf_x", &Wf_x}, {"lstm.bf", &bf},
          {"lstm.Wg_h", &Wg_h}, {"lstm.Wg_x", &Wg_x}, {"lstm.bg", &bg},
          {"lstm.Wo_h", &Wo_h}, {"lstm.Wo_x", &Wo_x}, {"lstm.bo", &bo},
          {"lstm.Whead", &Whead}, {"lstm.bhead", &bhead}};
}

void LstmParams::validate() const {
  const std::size_t h = Wc_h.rows(), d = Wc_x.cols(), o = Whead.rows();
  require_matching(Wc_h, h, h, "Wc_h");
  require_matching(Wc_x, h, d, "Wc_x");
  require_matching(bc, h, 1, "bc");
  require_matching(Wf_h, h, h, "Wf_h");
  require_matching(Wf_x, h, d, "Wf_x");
  require_matching(bf, h, 1, "bf");
  require_matching(Wg_h, h, h, "Wg_h");
  require_matching(Wg_x, h, d, "Wg_x");
  require_matching(bg, h, 1, "bg");
  require_matching(Wo_h, h, h, "Wo_h");
  require_matching(Wo_x, h, d, "Wo_x");
  require_matching(bo, h, 1, "bo");
  require_matching(Whead, o, h, "Whead");
  require_matching(bhead, o, 1, "bhead");
}

AnnParams AnnParams::init(std::size_t hidden, std::size_t input, std::size_t output, Rng& rng) {
  if (hidden == 0 || input == 0 || output == 0)
    throw ConfigError("ann sizes must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  AnnParams p;
  p.W1 = uniform_tensor(hidden, input, bound, rng);
  p.b1 = ad::Tensor(hidden, 1);
  p.W2 = uniform_tensor(output, hidden, bound, rng);
  p.b2 = ad::Tensor(output, 1);
  return p;
}

std::vector<ad::Tensor*> AnnParams::tensors() { return {&W1, &b1, &W2, &b2}; }

std::vector<std::pair<std::string, ad::Tensor*>> AnnParams::named_tensors() {
  return {{"ann.W1", &W1}, {"ann.b1", &b1}, {"ann.W2", &W2}, {"ann.b2", &b2}};
}

void AnnParams::validate() const {
  const std::size_t h = W1.rows(), d = W1.cols(), o = W2.rows();
  require_matching(W1, h, d, "W1");
  require_matching(b1, h, 1, "b1");
  require_matching(W2, o, h, "W2");
  require_matching(b2, o, 1, "b2");
}

Normalization Normalization::identity(std::size_t inputs, std::size_t outputs) {
  Normalization n;
  n.x_mean = ad::Tensor(inputs, 1);
  n.x_std = ad::Tensor::full(inputs, 1, 1.0);
  n.y_mean = ad::Tensor(outputs, 1);
  n.y_std = ad::Tensor::full(outputs, 1, 1.0);
  return n;
}

Variant parse_variant(const std::string& name) {
  if (name == "phy") return Variant::kPhy;
  if (name == "ann") return Variant::kAnn;
  if (name == "rnn") return Variant::kRnn;
  if (name == "pgrnn0") return Variant::kPgrnn0;
  if (name == "pgrnn") return Variant::kPgrnn;
  throw ConfigError("unknown model variant '" + name +
                    "' (expected phy|ann|rnn|pgrnn0|pgrnn)");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kPhy: return "phy";
    case Variant::kAnn: return "ann";
    case Variant::kRnn: return "rnn";
    case Variant::kPgrnn0: return "pgrnn0";
    case Variant::kPgrnn: return "pgrnn";
  }
  return "?";
}

std::vector<ad::Tensor*> Model::tensors() {
  return variant == Variant::kAnn ? ann.tensors() : lstm.tensors();
}

std::size_t Model::output_size() const {
  return variant == Variant::kAnn ? ann.output_size() : lstm.output_size();
}

LstmNodes register_lstm(ad::Graph& g, const LstmParams& p, bool trainable) {
  p.validate();
  auto leaf = [&](const ad::Tensor& t, const char* label) {
    return trainable ? g.parameter(t, label) : g.constant(t, label);
  };
  LstmNodes n;
  n.Wc_h = leaf(p.Wc_h, "Wc_h");
  n.Wc_x = leaf(p.Wc_x, "Wc_x");
  n.bc = leaf(p.bc, "bc");
  n.Wf_h = leaf(p.Wf_h, "Wf_h");
  n.Wf_x = leaf(p.Wf_x, "Wf_x");
  n.bf = leaf(p.bf, "bf");
  n.Wg_h = leaf(p.Wg_h, "Wg_h");
  n.Wg_x = leaf(p.Wg_x, "Wg_x");
  n.bg = leaf(p.bg, "bg");
  n.Wo_h = leaf(p.Wo_h, "Wo_h");
  n.Wo_x = leaf(p.Wo_x, "Wo_x");
  n.bo = leaf(p.bo, "bo");
  n.Whead = leaf(p.Whead, "Whead");
  n.bhead = leaf(p.bhead, "bhead");
  return n;
}

AnnNodes register_ann(ad::Graph& g, const AnnParams& p, bool trainable) {
  p.validate();
  auto leaf = [&](const ad::Tensor& t, const char* label) {
    return trainable ? g.parameter(t, label) : g.constant(t, label);
  };
  AnnNodes n;
  n.W1 = leaf(p.W1, "W1");
  n.b1 = leaf(p.b1, "b1");
  n.W2 = leaf(p.W2, "W2");
  n.b2 = leaf(p.b2, "b2");
  return n;
}

CellOut lstm_cell_node(ad::Graph& g, const LstmNodes& n, ad::Graph::NodeId x,
                       ad::Graph::NodeId h_prev, ad::Graph::NodeId c_prev) {
  auto gate_input = [&](ad::Graph::NodeId wh, ad::Graph::NodeId wx, ad::Graph::NodeId b) {
    return g.add(g.add(g.matmul(wh, h_prev), g.matmul(wx, x)), b);
  };
  const auto candidate = g.tanh(gate_input(n.Wc_h, n.Wc_x, n.bc));
  const auto forget = g.sigmoid(gate_input(n.Wf_h, n.Wf_x, n.bf));
  const auto input = g.sigmoid(gate_input(n.Wg_h, n.Wg_x, n.bg));
  const auto output = g.sigmoid(gate_input(n.Wo_h, n.Wo_x, n.bo));
  CellOut out;
  out.c = g.add(g.mul(forget, c_prev), g.mul(input, candidate));
  out.h = g.mul(output, g.tanh(out.c));
  return out;
}

UnrollOut unroll_lstm(ad::Graph& g, const LstmNodes& n, const ad::Tensor& x_norm,
                      const LstmState* initial) {
  const std::size_t steps = x_norm.rows();
  const std::size_t input = x_norm.cols();
  const std::size_t hidden = g.value(n.Wc_h).rows();
  if (input != g.value(n.Wc_x).cols())
    throw ShapeError("unroll input width " + std::to_string(input) + " does not match Wc_x " +
                     g.value(n.Wc_x).shape_str());
  if (steps == 0) throw ShapeError("unroll needs at least one timestep");

  ad::Tensor h0(hidden, 1), c0(hidden, 1);
  if (initial) {
    if (initial->h.size() != hidden || initial->c.size() != hidden)
      throw ShapeError("initial state size does not match hidden size");
    h0 = ad::Tensor::column(initial->h);
    c0 = ad::Tensor::column(initial->c);
  }
  auto h = g.constant(std::move(h0), "h0");
  auto c = g.constant(std::move(c0), "c0");

  UnrollOut out;
  out.hidden.reserve(steps);
  std::vector<ad::Graph::NodeId> rows;
  rows.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> col(input);
    for (std::size_t j = 0; j < input; ++j) col[j] = x_norm(t, j);
    const auto x = g.constant(ad::Tensor::column(std::move(col)));
    const CellOut step = lstm_cell_node(g, n, x, h, c);
    h = step.h;
    c = step.c;
    out.hidden.push_back(h);
    rows.push_back(g.transpose(g.add(g.matmul(n.Whead, h), n.bhead)));
  }
  out.pred_norm = g.concat_rows(rows);
  return out;
}

ad::Graph::NodeId ann_forward_node(ad::Graph& g, const AnnNodes& n, const ad::Tensor& x_norm) {
  const std::size_t steps = x_norm.rows();
  const std::size_t input = x_norm.cols();
  if (input != g.value(n.W1).cols())
    throw ShapeError("ann input width " + std::to_string(input) + " does not match W1 " +
                     g.value(n.W1).shape_str());
  std::vector<ad::Graph::NodeId> rows;
  rows.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> col(input);
    for (std::size_t j = 0; j < input; ++j) col[j] = x_norm(t, j);
    const auto x = g.constant(ad::Tensor::column(std::move(col)));
    const auto hidden = g.tanh(g.add(g.matmul(n.W1, x), n.b1));
    rows.push_back(g.transpose(g.add(g.matmul(n.W2, hidden), n.b2)));
  }
  return g.concat_rows(rows);
}

ad::Graph::NodeId denormalize_node(ad::Graph& g, ad::Graph::NodeId pred_norm,
                                   const Normalization& norm) {
  if (norm.empty()) throw ConfigError("missing normalization statistics");
  const ad::Tensor& p = g.value(pred_norm);
  if (norm.y_mean.rows() != p.cols())
    throw ShapeError("normalization output width " + std::to_string(norm.y_mean.rows()) +
                     " does not match predictions " + p.shape_str());
  ad::Tensor mean_tile(p.rows(), p.cols()), std_tile(p.rows(), p.cols());
  for (std::size_t t = 0; t < p.rows(); ++t)
    for (std::size_t j = 0; j < p.cols(); ++j) {
      mean_tile(t, j) = norm.y_mean[j];
      std_tile(t, j) = norm.y_std[j];
    }
  return g.add(g.mul(pred_norm, g.constant(std::move(std_tile), "y_std")),
               g.constant(std::move(mean_tile), "y_mean"));
}

LstmState lstm_cell(const std::vector<double>& x, const LstmState& state, const LstmParams& p) {
  ad::Graph g;
  const LstmNodes n = register_lstm(g, p, false);
  if (x.size() != p.input_size()) throw ShapeError("lstm_cell input size mismatch");
  if (state.h.size() != p.hidden_size() || state.c.size() != p.hidden_size())
    throw ShapeError("lstm_cell state size mismatch");
  const auto xn = g.constant(ad::Tensor::column(x));
  const auto h0 = g.constant(ad::Tensor::column(state.h));
  const auto c0 = g.constant(ad::Tensor::column(state.c));
  const CellOut out = lstm_cell_node(g, n, xn, h0, c0);
  return {g.value(out.h).data(), g.value(out.c).data()};
}

std::vector<std::vector<double>> unroll(const ad::Tensor& x_seq, const LstmParams& p,
                                        const LstmState* initial) {
  ad::Graph g;
  const LstmNodes n = register_lstm(g, p, false);
  const UnrollOut out = unroll_lstm(g, n, x_seq, initial);
  std::vector<std::vector<double>> hs;
  hs.reserve(out.hidden.size());
  for (auto id : out.hidden) hs.push_back(g.value(id).data());
  return hs;
}

std::vector<double> predict_profile(const std::vector<double>& h, const LstmParams& p,
                                    const Normalization& norm) {
  if (norm.empty()) throw ConfigError("missing normalization statistics");
  if (h.size() != p.hidden_size()) throw ShapeError("predict_profile hidden size mismatch");
  if (norm.y_mean.rows() != p.output_size())
    throw ShapeError("predict_profile normalization width mismatch");
  std::vector<double> out(p.output_size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = p.bhead[i];
    for (std::size_t j = 0; j < h.size(); ++j) acc += p.Whead(i, j) * h[j];
    out[i] = acc * norm.y_std[i] + norm.y_mean[i];
  }
  return out;
}

std::vector<double> ann_forward(const std::vector<double>& x, const AnnParams& p) {
  ad::Graph g;
  const AnnNodes n = register_ann(g, p, false);
  if (x.size() != p.input_size()) throw ShapeError("ann_forward input size mismatch");
  ad::Tensor row(1, x.size());
  for (std::size_t j = 0; j < x.size(); ++j) row(0, j) = x[j];
  const auto pred = ann_forward_node(g, n, row);
  return g.value(pred).data();
}

ad::Tensor predict_matrix(Model& model, const ad::Tensor& x_raw) {
  if (model.norm.empty()) throw ConfigError("missing normalization statistics");
  if (x_raw.cols() != model.norm.x_mean.rows())
    throw ShapeError("prediction input width " + std::to_string(x_raw.cols()) +
                     " does not match normalization " + model.norm.x_mean.shape_str());
  ad::Tensor x = x_raw;
  for (std::size_t t = 0; t < x.rows(); ++t)
    for (std::size_t j = 0; j < x.cols(); ++j)
      x(t, j) = (x(t, j) - model.norm.x_mean[j]) / model.norm.x_std[j];

  ad::Graph g;
  ad::Graph::NodeId pred_norm;
  if (model.variant == Variant::kAnn) {
    const AnnNodes n = register_ann(g, model.ann, false);
    pred_norm = ann_forward_node(g, n, x);
  } else {
    const LstmNodes n = register_lstm(g, model.lstm, false);
    pred_norm = unroll_lstm(g, n, x).pred_norm;
  }
  return g.value(denormalize_node(g, pred_norm, model.norm));
}

}  // namespace pglake::nn
