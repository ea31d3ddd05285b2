#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pglake::ad {

// Dense row-major matrix of doubles. Vectors are (n, 1) columns and scalars
// are (1, 1). Tensors are immutable values in graph nodes; mutation happens
// only through parameter updates between graph builds.
class Tensor {
 public:
  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols);  // zero-filled
  Tensor(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor column(std::vector<double> values);
  static Tensor full(std::size_t rows, std::size_t cols, double v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_str() const;

  bool all_finite() const;

  double item() const;  // value of a (1,1) tensor; throws otherwise

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

bool operator==(const Tensor& a, const Tensor& b);

}  // namespace pglake::ad
