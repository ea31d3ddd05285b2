#include "ad/tensor.hpp"

#include <cmath>

#include "common/errors.hpp"

namespace pglake::ad {

Tensor::Tensor(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
  if (rows == 0 || cols == 0) throw ShapeError("tensor extents must be positive");
}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows == 0 || cols == 0) throw ShapeError("tensor extents must be positive");
  if (data_.size() != rows * cols)
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str());
}

Tensor Tensor::scalar(double v) { return Tensor(1, 1, {v}); }

Tensor Tensor::column(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(n, 1, std::move(values));
}

Tensor Tensor::full(std::size_t rows, std::size_t cols, double v) {
  Tensor t(rows, cols);
  for (auto& x : t.data_) x = v;
  return t;
}

std::string Tensor::shape_str() const {
  return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::item() const {
  if (rows_ != 1 || cols_ != 1)
    throw ShapeError("item() requires a scalar tensor, got " + shape_str());
  return data_[0];
}

bool operator==(const Tensor& a, const Tensor& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a.data() == b.data();
}

}  // namespace pglake::ad
