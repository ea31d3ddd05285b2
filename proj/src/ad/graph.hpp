#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ad/tensor.hpp"

namespace pglake::ad {

enum class OpKind {
  kLeaf,
  kMatMul,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kScale,      // c * x
  kAddScalar,  // x + c
  kTanh,
  kSigmoid,
  kSquare,
  kRelu,  // max(0, x); subgradient at 0 is 0
  kAbs,
  kTranspose,
  kConcatRows,
  kSlice,  // block [r0,r1) x [c0,c1)
  kSum,
  kMean,
};

const char* op_name(OpKind k);

// Reverse-mode tape built define-by-run. Values are computed eagerly as nodes
// are appended; backward() walks the records in reverse. A Graph is
// single-owner: no concurrent use during construction or backward.
class Graph {
 public:
  using NodeId = int;

  // Leaves. Parameters are the trainable subset; constants never receive
  // gradients. set_value + recompute allow re-evaluating the same graph at
  // new leaf values (used by grad_check and the optimizer loop).
  NodeId parameter(Tensor value, std::string label = {});
  NodeId constant(Tensor value, std::string label = {});

  NodeId matmul(NodeId a, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId div(NodeId a, NodeId b);
  NodeId scale(NodeId x, double c);
  NodeId add_scalar(NodeId x, double c);
  NodeId tanh(NodeId x);
  NodeId sigmoid(NodeId x);
  NodeId square(NodeId x);
  NodeId relu(NodeId x);
  NodeId abs(NodeId x);
  NodeId transpose(NodeId x);
  NodeId concat_rows(const std::vector<NodeId>& parts);
  NodeId slice(NodeId x, std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1);
  NodeId sum(NodeId x);
  NodeId mean(NodeId x);

  const Tensor& value(NodeId id) const;
  const Tensor& grad(NodeId id) const;  // valid for leaves after backward()

  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<NodeId>& parameters() const { return parameters_; }

  // Replaces a leaf's value (shape must match) without re-running the graph.
  void set_value(NodeId leaf, const Tensor& value);
  // Recomputes every non-leaf node in topological (= insertion) order.
  void recompute();

  // Accumulates gradients of a scalar loss into every node that needs them.
  // Leaves flagged trainable always end up with a gradient tensor of their
  // own shape, zero where the loss does not depend on them.
  void backward(NodeId loss);

  // Max over all parameter entries of
  //   |analytic - central_difference| / (|central_difference| + 1e-12).
  // Re-evaluates the graph 2 * #entries times; leaves values restored.
  double grad_check(NodeId loss, double epsilon);

 private:
  struct Node {
    OpKind op = OpKind::kLeaf;
    std::array<NodeId, 2> in{-1, -1};
    std::vector<NodeId> in_many;  // kConcatRows only
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool trainable = false;
    double attr = 0.0;                         // kScale / kAddScalar
    std::array<std::size_t, 4> window{};       // kSlice bounds
    std::string label;
  };

  NodeId append(Node n);
  NodeId unary(OpKind op, NodeId x);
  NodeId binary(OpKind op, NodeId a, NodeId b);
  void eval(Node& n) const;
  void check_id(NodeId id) const;
  void check_input_finite(const Node& n, NodeId id) const;
  std::string describe(NodeId id) const;

  std::vector<Node> nodes_;
  std::vector<NodeId> parameters_;
};

}  // namespace pglake::ad
