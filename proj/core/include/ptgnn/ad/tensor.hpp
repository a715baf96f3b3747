#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace ptgnn::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

/// Dense row-major float64 array. Most operations work on rank-2 tensors;
/// a scalar is any tensor with one element.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);
  static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor({rows, cols}); }
  static Tensor scalar(double value) { return Tensor({1, 1}, std::vector<double>{value}); }
  static Tensor identity(std::size_t n);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  /// Rank-2 extents; a rank-1 tensor of length n reads as 1 x n.
  std::size_t rows() const;
  std::size_t cols() const;

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<const double> row(std::size_t r) const { return values().subspan(r * cols(), cols()); }
  std::span<double> row(std::size_t r) { return values().subspan(r * cols(), cols()); }

  /// Value of a one-element tensor.
  double item() const;

  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

}  // namespace ptgnn::ad
