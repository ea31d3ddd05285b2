#include "ad/graph.hpp"

#include <cmath>
#include <utility>

#include "common/errors.hpp"

namespace pglake::ad {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// C += A * B, naive ikj order (cache-friendly for row-major operands).
void matmul_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < k; ++l) {
      const double av = pa[i * k + l];
      if (av == 0.0) continue;
      const double* brow = pb + l * m;
      double* crow = pc + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C += A^T * B
void matmul_at_b_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * k;
    const double* brow = pb + i * m;
    for (std::size_t l = 0; l < k; ++l) {
      const double av = arow[l];
      if (av == 0.0) continue;
      double* crow = pc + l * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

// C += A * B^T
void matmul_a_bt_acc(const Tensor& a, const Tensor& b, Tensor& c) {
  const std::size_t n = a.rows(), m = a.cols(), k = b.rows();
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* pc = c.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = pa + i * m;
    double* crow = pc + i * k;
    for (std::size_t l = 0; l < k; ++l) {
      const double* brow = pb + l * m;
      double acc = 0.0;
      for (std::size_t j = 0; j < m; ++j) acc += arow[j] * brow[j];
      crow[l] += acc;
    }
  }
}

}  // namespace

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kDiv: return "div";
    case OpKind::kScale: return "scale";
    case OpKind::kAddScalar: return "add_scalar";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kSquare: return "square";
    case OpKind::kRelu: return "relu";
    case OpKind::kAbs: return "abs";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kConcatRows: return "concat_rows";
    case OpKind::kSlice: return "slice";
    case OpKind::kSum: return "sum";
    case OpKind::kMean: return "mean";
  }
  return "?";
}

std::string Graph::describe(NodeId id) const {
  const Node& n = nodes_[id];
  std::string s = "node " + std::to_string(id) + " (" + op_name(n.op);
  if (!n.label.empty()) s += " '" + n.label + "'";
  return s + ")";
}

void Graph::check_id(NodeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw ShapeError("unknown graph node id " + std::to_string(id));
}

void Graph::check_input_finite(const Node& n, NodeId id) const {
  if (!n.value.all_finite())
    throw NumericError("non-finite values entering " + describe(id));
}

Graph::NodeId Graph::append(Node n) {
  eval(n);
  nodes_.push_back(std::move(n));
  const NodeId id = static_cast<NodeId>(nodes_.size()) - 1;
  if (!nodes_[id].value.all_finite())
    throw NumericError("non-finite result produced by " + describe(id));
  return id;
}

Graph::NodeId Graph::parameter(Tensor value, std::string label) {
  if (!value.all_finite())
    throw NumericError("non-finite values in parameter leaf '" + label + "'");
  Node n;
  n.op = OpKind::kLeaf;
  n.value = std::move(value);
  n.requires_grad = true;
  n.trainable = true;
  n.label = std::move(label);
  nodes_.push_back(std::move(n));
  const NodeId id = static_cast<NodeId>(nodes_.size()) - 1;
  parameters_.push_back(id);
  return id;
}

Graph::NodeId Graph::constant(Tensor value, std::string label) {
  if (!value.all_finite())
    throw NumericError("non-finite values in constant leaf '" + label + "'");
  Node n;
  n.op = OpKind::kLeaf;
  n.value = std::move(value);
  n.label = std::move(label);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Graph::NodeId Graph::unary(OpKind op, NodeId x) {
  check_id(x);
  check_input_finite(nodes_[x], x);
  Node n;
  n.op = op;
  n.in = {x, -1};
  n.requires_grad = nodes_[x].requires_grad;
  return append(std::move(n));
}

Graph::NodeId Graph::binary(OpKind op, NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  check_input_finite(nodes_[a], a);
  check_input_finite(nodes_[b], b);
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (op == OpKind::kMatMul) {
    if (ta.cols() != tb.rows())
      throw ShapeError("matmul shape mismatch " + ta.shape_str() + " x " + tb.shape_str());
  } else if (!ta.same_shape(tb)) {
    throw ShapeError(std::string(op_name(op)) + " shape mismatch " + ta.shape_str() +
                     " vs " + tb.shape_str());
  }
  Node n;
  n.op = op;
  n.in = {a, b};
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return append(std::move(n));
}

Graph::NodeId Graph::matmul(NodeId a, NodeId b) { return binary(OpKind::kMatMul, a, b); }
Graph::NodeId Graph::add(NodeId a, NodeId b) { return binary(OpKind::kAdd, a, b); }
Graph::NodeId Graph::sub(NodeId a, NodeId b) { return binary(OpKind::kSub, a, b); }
Graph::NodeId Graph::mul(NodeId a, NodeId b) { return binary(OpKind::kMul, a, b); }
Graph::NodeId Graph::div(NodeId a, NodeId b) { return binary(OpKind::kDiv, a, b); }

Graph::NodeId Graph::scale(NodeId x, double c) {
  check_id(x);
  check_input_finite(nodes_[x], x);
  Node n;
  n.op = OpKind::kScale;
  n.in = {x, -1};
  n.attr = c;
  n.requires_grad = nodes_[x].requires_grad;
  return append(std::move(n));
}

Graph::NodeId Graph::add_scalar(NodeId x, double c) {
  check_id(x);
  check_input_finite(nodes_[x], x);
  Node n;
  n.op = OpKind::kAddScalar;
  n.in = {x, -1};
  n.attr = c;
  n.requires_grad = nodes_[x].requires_grad;
  return append(std::move(n));
}

Graph::NodeId Graph::tanh(NodeId x) { return unary(OpKind::kTanh, x); }
Graph::NodeId Graph::sigmoid(NodeId x) { return unary(OpKind::kSigmoid, x); }
Graph::NodeId Graph::square(NodeId x) { return unary(OpKind::kSquare, x); }
Graph::NodeId Graph::relu(NodeId x) { return unary(OpKind::kRelu, x); }
Graph::NodeId Graph::abs(NodeId x) { return unary(OpKind::kAbs, x); }
Graph::NodeId Graph::transpose(NodeId x) { return unary(OpKind::kTranspose, x); }
Graph::NodeId Graph::sum(NodeId x) { return unary(OpKind::kSum, x); }
Graph::NodeId Graph::mean(NodeId x) { return unary(OpKind::kMean, x); }

Graph::NodeId Graph::concat_rows(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows needs at least one input");
  std::size_t cols = 0;
  for (NodeId id : parts) {
    check_id(id);
    check_input_finite(nodes_[id], id);
    if (cols == 0)
      cols = nodes_[id].value.cols();
    else if (nodes_[id].value.cols() != cols)
      throw ShapeError("concat_rows column mismatch " + nodes_[id].value.shape_str() +
                       " vs (~x" + std::to_string(cols) + ")");
  }
  Node n;
  n.op = OpKind::kConcatRows;
  n.in_many = parts;
  for (NodeId id : parts) n.requires_grad = n.requires_grad || nodes_[id].requires_grad;
  return append(std::move(n));
}

Graph::NodeId Graph::slice(NodeId x, std::size_t r0, std::size_t r1, std::size_t c0,
                           std::size_t c1) {
  check_id(x);
  check_input_finite(nodes_[x], x);
  const Tensor& t = nodes_[x].value;
  if (r0 >= r1 || c0 >= c1 || r1 > t.rows() || c1 > t.cols())
    throw ShapeError("slice [" + std::to_string(r0) + "," + std::to_string(r1) + ")x[" +
                     std::to_string(c0) + "," + std::to_string(c1) + ") out of bounds for " +
                     t.shape_str());
  Node n;
  n.op = OpKind::kSlice;
  n.in = {x, -1};
  n.window = {r0, r1, c0, c1};
  n.requires_grad = nodes_[x].requires_grad;
  return append(std::move(n));
}

void Graph::eval(Node& n) const {
  switch (n.op) {
    case OpKind::kLeaf:
      return;
    case OpKind::kMatMul: {
      const Tensor& a = nodes_[n.in[0]].value;
      const Tensor& b = nodes_[n.in[1]].value;
      n.value = Tensor(a.rows(), b.cols());
      matmul_acc(a, b, n.value);
      return;
    }
    case OpKind::kAdd:
    case OpKind::kSub:
    case OpKind::kMul:
    case OpKind::kDiv: {
      const Tensor& a = nodes_[n.in[0]].value;
      const Tensor& b = nodes_[n.in[1]].value;
      n.value = Tensor(a.rows(), a.cols());
      const std::size_t sz = a.size();
      for (std::size_t i = 0; i < sz; ++i) {
        switch (n.op) {
          case OpKind::kAdd: n.value[i] = a[i] + b[i]; break;
          case OpKind::kSub: n.value[i] = a[i] - b[i]; break;
          case OpKind::kMul: n.value[i] = a[i] * b[i]; break;
          default: n.value[i] = a[i] / b[i]; break;
        }
      }
      return;
    }
    case OpKind::kScale:
    case OpKind::kAddScalar:
    case OpKind::kTanh:
    case OpKind::kSigmoid:
    case OpKind::kSquare:
    case OpKind::kRelu:
    case OpKind::kAbs: {
      const Tensor& a = nodes_[n.in[0]].value;
      n.value = Tensor(a.rows(), a.cols());
      const std::size_t sz = a.size();
      for (std::size_t i = 0; i < sz; ++i) {
        switch (n.op) {
          case OpKind::kScale: n.value[i] = n.attr * a[i]; break;
          case OpKind::kAddScalar: n.value[i] = a[i] + n.attr; break;
          case OpKind::kTanh: n.value[i] = std::tanh(a[i]); break;
          case OpKind::kSigmoid: n.value[i] = stable_sigmoid(a[i]); break;
          case OpKind::kSquare: n.value[i] = a[i] * a[i]; break;
          case OpKind::kRelu: n.value[i] = a[i] > 0.0 ? a[i] : 0.0; break;
          default: n.value[i] = std::fabs(a[i]); break;
        }
      }
      return;
    }
    case OpKind::kTranspose: {
      const Tensor& a = nodes_[n.in[0]].value;
      n.value = Tensor(a.cols(), a.rows());
      for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) n.value(c, r) = a(r, c);
      return;
    }
    case OpKind::kConcatRows: {
      std::size_t rows = 0;
      const std::size_t cols = nodes_[n.in_many[0]].value.cols();
      for (NodeId id : n.in_many) rows += nodes_[id].value.rows();
      n.value = Tensor(rows, cols);
      std::size_t r = 0;
      for (NodeId id : n.in_many) {
        const Tensor& p = nodes_[id].value;
        for (std::size_t i = 0; i < p.size(); ++i) n.value[r * cols + i] = p[i];
        r += p.rows();
      }
      return;
    }
    case OpKind::kSlice: {
      const Tensor& a = nodes_[n.in[0]].value;
      const auto [r0, r1, c0, c1] = n.window;
      n.value = Tensor(r1 - r0, c1 - c0);
      for (std::size_t r = r0; r < r1; ++r)
        for (std::size_t c = c0; c < c1; ++c) n.value(r - r0, c - c0) = a(r, c);
      return;
    }
    case OpKind::kSum:
    case OpKind::kMean: {
      const Tensor& a = nodes_[n.in[0]].value;
      double acc = 0.0;
      for (double v : a.data()) acc += v;
      if (n.op == OpKind::kMean) acc /= static_cast<double>(a.size());
      n.value = Tensor::scalar(acc);
      return;
    }
  }
}

const Tensor& Graph::value(NodeId id) const {
  check_id(id);
  return nodes_[id].value;
}

const Tensor& Graph::grad(NodeId id) const {
  check_id(id);
  if (nodes_[id].grad.empty())
    throw ShapeError(describe(id) + " has no gradient (run backward first)");
  return nodes_[id].grad;
}

void Graph::set_value(NodeId leaf, const Tensor& value) {
  check_id(leaf);
  Node& n = nodes_[leaf];
  if (n.op != OpKind::kLeaf) throw ShapeError(describe(leaf) + " is not a leaf");
  if (!n.value.same_shape(value))
    throw ShapeError("set_value shape mismatch " + n.value.shape_str() + " vs " +
                     value.shape_str() + " on " + describe(leaf));
  n.value = value;
}

void Graph::recompute() {
  for (auto& n : nodes_)
    if (n.op != OpKind::kLeaf) eval(n);
}

void Graph::backward(NodeId loss) {
  check_id(loss);
  const Node& ln = nodes_[loss];
  if (ln.value.rows() != 1 || ln.value.cols() != 1)
    throw ShapeError("backward requires a scalar loss, got " + ln.value.shape_str() +
                     " at " + describe(loss));

  for (auto& n : nodes_) n.grad = Tensor();
  for (NodeId p : parameters_)
    nodes_[p].grad = Tensor(nodes_[p].value.rows(), nodes_[p].value.cols());
  nodes_[loss].grad = Tensor::scalar(1.0);

  auto acc = [&](NodeId id, std::size_t r, std::size_t c) -> Tensor& {
    Node& n = nodes_[id];
    if (n.grad.empty()) n.grad = Tensor(r, c);
    return n.grad;
  };

  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.grad.empty() || !n.requires_grad) continue;
    if (!n.grad.all_finite())
      throw NumericError("non-finite gradient at " + describe(id));
    const Tensor& g = n.grad;
    switch (n.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kMatMul: {
        Node& a = nodes_[n.in[0]];
        Node& b = nodes_[n.in[1]];
        if (a.requires_grad)
          matmul_a_bt_acc(g, b.value, acc(n.in[0], a.value.rows(), a.value.cols()));
        if (b.requires_grad)
          matmul_at_b_acc(a.value, g, acc(n.in[1], b.value.rows(), b.value.cols()));
        break;
      }
      case OpKind::kAdd:
      case OpKind::kSub:
      case OpKind::kMul:
      case OpKind::kDiv: {
        Node& a = nodes_[n.in[0]];
        Node& b = nodes_[n.in[1]];
        if (a.requires_grad) {
          Tensor& ga = acc(n.in[0], a.value.rows(), a.value.cols());
          for (std::size_t i = 0; i < g.size(); ++i) {
            switch (n.op) {
              case OpKind::kAdd:
              case OpKind::kSub: ga[i] += g[i]; break;
              case OpKind::kMul: ga[i] += g[i] * b.value[i]; break;
              default: ga[i] += g[i] / b.value[i]; break;
            }
          }
        }
        if (b.requires_grad) {
          Tensor& gb = acc(n.in[1], b.value.rows(), b.value.cols());
          for (std::size_t i = 0; i < g.size(); ++i) {
            switch (n.op) {
              case OpKind::kAdd: gb[i] += g[i]; break;
              case OpKind::kSub: gb[i] -= g[i]; break;
              case OpKind::kMul: gb[i] += g[i] * a.value[i]; break;
              default: gb[i] -= g[i] * n.value[i] / b.value[i]; break;
            }
          }
        }
        break;
      }
      case OpKind::kScale:
      case OpKind::kAddScalar:
      case OpKind::kTanh:
      case OpKind::kSigmoid:
      case OpKind::kSquare:
      case OpKind::kRelu:
      case OpKind::kAbs: {
        Node& a = nodes_[n.in[0]];
        if (!a.requires_grad) break;
        Tensor& ga = acc(n.in[0], a.value.rows(), a.value.cols());
        for (std::size_t i = 0; i < g.size(); ++i) {
          switch (n.op) {
            case OpKind::kScale: ga[i] += g[i] * n.attr; break;
            case OpKind::kAddScalar: ga[i] += g[i]; break;
            case OpKind::kTanh: ga[i] += g[i] * (1.0 - n.value[i] * n.value[i]); break;
            case OpKind::kSigmoid: ga[i] += g[i] * n.value[i] * (1.0 - n.value[i]); break;
            case OpKind::kSquare: ga[i] += g[i] * 2.0 * a.value[i]; break;
            case OpKind::kRelu: ga[i] += a.value[i] > 0.0 ? g[i] : 0.0; break;
            default:
              ga[i] += a.value[i] > 0.0 ? g[i] : (a.value[i] < 0.0 ? -g[i] : 0.0);
              break;
          }
        }
        break;
      }
      case OpKind::kTranspose: {
        Node& a = nodes_[n.in[0]];
        if (!a.requires_grad) break;
        Tensor& ga = acc(n.in[0], a.value.rows(), a.value.cols());
        for (std::size_t r = 0; r < g.rows(); ++r)
          for (std::size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
        break;
      }
      case OpKind::kConcatRows: {
        std::size_t r = 0;
        for (NodeId pid : n.in_many) {
          Node& p = nodes_[pid];
          const std::size_t pr = p.value.rows(), pc = p.value.cols();
          if (p.requires_grad) {
            Tensor& gp = acc(pid, pr, pc);
            for (std::size_t i = 0; i < pr * pc; ++i) gp[i] += g[r * pc + i];
          }
          r += pr;
        }
        break;
      }
      case OpKind::kSlice: {
        Node& a = nodes_[n.in[0]];
        if (!a.requires_grad) break;
        Tensor& ga = acc(n.in[0], a.value.rows(), a.value.cols());
        const auto [r0, r1, c0, c1] = n.window;
        for (std::size_t r = r0; r < r1; ++r)
          for (std::size_t c = c0; c < c1; ++c) ga(r, c) += g(r - r0, c - c0);
        break;
      }
      case OpKind::kSum:
      case OpKind::kMean: {
        Node& a = nodes_[n.in[0]];
        if (!a.requires_grad) break;
        Tensor& ga = acc(n.in[0], a.value.rows(), a.value.cols());
        const double w =
            n.op == OpKind::kSum ? g[0] : g[0] / static_cast<double>(a.value.size());
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += w;
        break;
      }
    }
  }
}

double Graph::grad_check(NodeId loss, double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1e-2))
    throw ConfigError("grad_check epsilon must be in (0, 1e-2]");
  backward(loss);

  std::vector<Tensor> analytic;
  analytic.reserve(parameters_.size());
  for (NodeId p : parameters_) analytic.push_back(nodes_[p].grad);

  double max_err = 0.0;
  for (std::size_t pi = 0; pi < parameters_.size(); ++pi) {
    const NodeId p = parameters_[pi];
    Tensor& v = nodes_[p].value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double old = v[i];
      v[i] = old + epsilon;
      recompute();
      const double fp = nodes_[loss].value.item();
      v[i] = old - epsilon;
      recompute();
      const double fm = nodes_[loss].value.item();
      v[i] = old;
      const double numeric = (fp - fm) / (2.0 * epsilon);
      const double err = std::fabs(analytic[pi][i] - numeric) / (std::fabs(numeric) + 1e-12);
      if (err > max_err) max_err = err;
    }
  }
  recompute();
  return max_err;
}

}  // namespace pglake::ad
