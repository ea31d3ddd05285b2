#pragma once

#include <string>
#include <vector>

#include "ad/graph.hpp"
#include "ad/tensor.hpp"
#include "common/rng.hpp"

namespace pglake::nn {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

// LSTM cell weights plus the linear output head. Biases are kept explicit.
// Vectors are (n, 1) column tensors throughout.
struct LstmParams {
  ad::Tensor Wc_h, Wc_x, bc;  // candidate cell state
  ad::Tensor Wf_h, Wf_x, bf;  // forget gate
  ad::Tensor Wg_h, Wg_x, bg;  // input gate
  ad::Tensor Wo_h, Wo_x, bo;  // output gate
  ad::Tensor Whead, bhead;    // hidden -> output profile (normalized units)

  // Uniform init in [-1/sqrt(H), 1/sqrt(H)], forget-gate bias +1, other
  // biases zero. Draw order is tensors() order, row-major within a tensor.
  static LstmParams init(std::size_t hidden, std::size_t input, std::size_t output, Rng& rng);

  std::size_t hidden_size() const { return Wc_h.rows(); }
  std::size_t input_size() const { return Wc_x.cols(); }
  std::size_t output_size() const { return Whead.rows(); }

  std::vector<ad::Tensor*> tensors();
  std::vector<std::pair<std::string, ad::Tensor*>> named_tensors();
  void validate() const;
};

struct LstmState {
  std::vector<double> h;
  std::vector<double> c;
};

// One-hidden-layer tanh network, the stateless baseline.
struct AnnParams {
  ad::Tensor W1, b1;  // input -> hidden
  ad::Tensor W2, b2;  // hidden -> output (normalized units)

  static AnnParams init(std::size_t hidden, std::size_t input, std::size_t output, Rng& rng);

  std::size_t hidden_size() const { return W1.rows(); }
  std::size_t input_size() const { return W1.cols(); }
  std::size_t output_size() const { return W2.rows(); }

  std::vector<ad::Tensor*> tensors();
  std::vector<std::pair<std::string, ad::Tensor*>> named_tensors();
  void validate() const;
};

// Z-score statistics, column-wise for inputs and outputs. The head predicts
// in normalized units; predictions are mapped back to physical units with
// the stored output statistics.
struct Normalization {
  ad::Tensor x_mean, x_std;  // (D, 1)
  ad::Tensor y_mean, y_std;  // (n_out, 1)

  static Normalization identity(std::size_t inputs, std::size_t outputs);
  bool empty() const { return x_mean.empty(); }
};

enum class Variant { kPhy, kAnn, kRnn, kPgrnn0, kPgrnn };

Variant parse_variant(const std::string& name);
const char* variant_name(Variant v);
inline bool variant_uses_hpd(Variant v) { return v == Variant::kPgrnn0 || v == Variant::kPgrnn; }
inline bool variant_is_recurrent(Variant v) { return v != Variant::kAnn && v != Variant::kPhy; }

// A trained (or initialized) network bundle.
struct Model {
  Variant variant = Variant::kRnn;
  LstmParams lstm;  // active unless variant == kAnn
  AnnParams ann;    // active when variant == kAnn
  Normalization norm;

  std::vector<ad::Tensor*> tensors();
  std::size_t output_size() const;
};

// ---------------------------------------------------------------------------
// Graph builders
// ---------------------------------------------------------------------------

struct LstmNodes {
  ad::Graph::NodeId Wc_h, Wc_x, bc, Wf_h, Wf_x, bf, Wg_h, Wg_x, bg, Wo_h, Wo_x, bo, Whead, bhead;
};

struct AnnNodes {
  ad::Graph::NodeId W1, b1, W2, b2;
};

// Registers weights as graph leaves (trainable parameters or constants).
LstmNodes register_lstm(ad::Graph& g, const LstmParams& p, bool trainable);
AnnNodes register_ann(ad::Graph& g, const AnnParams& p, bool trainable);

// One cell application on node ids; returns (h', c').
struct CellOut {
  ad::Graph::NodeId h;
  ad::Graph::NodeId c;
};
CellOut lstm_cell_node(ad::Graph& g, const LstmNodes& n, ad::Graph::NodeId x,
                       ad::Graph::NodeId h_prev, ad::Graph::NodeId c_prev);

struct UnrollOut {
  std::vector<ad::Graph::NodeId> hidden;  // T ids, each (H, 1)
  ad::Graph::NodeId pred_norm;            // (T, n_out) stacked head outputs
};

// Left-to-right unroll over the rows of X (already normalized), zero initial
// state unless one is given.
UnrollOut unroll_lstm(ad::Graph& g, const LstmNodes& n, const ad::Tensor& x_norm,
                      const LstmState* initial = nullptr);

// Row-wise feedforward application; same output stacking as unroll_lstm.
ad::Graph::NodeId ann_forward_node(ad::Graph& g, const AnnNodes& n, const ad::Tensor& x_norm);

// pred_norm (T, n_out) -> physical units via tiled y_mean/y_std.
ad::Graph::NodeId denormalize_node(ad::Graph& g, ad::Graph::NodeId pred_norm,
                                   const Normalization& norm);

// ---------------------------------------------------------------------------
// Value-level operations (thin wrappers over the graph builders)
// ---------------------------------------------------------------------------

LstmState lstm_cell(const std::vector<double>& x, const LstmState& state, const LstmParams& p);
std::vector<std::vector<double>> unroll(const ad::Tensor& x_seq, const LstmParams& p,
                                        const LstmState* initial = nullptr);
std::vector<double> predict_profile(const std::vector<double>& h, const LstmParams& p,
                                    const Normalization& norm);
std::vector<double> ann_forward(const std::vector<double>& x, const AnnParams& p);

// Full-sequence prediction in physical units from raw (unnormalized) inputs.
ad::Tensor predict_matrix(Model& model, const ad::Tensor& x_raw);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

// Flat binary key->tensor container (shape headers + little-endian IEEE
// doubles); save/load round-trips bit-exactly.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace pglake::nn
