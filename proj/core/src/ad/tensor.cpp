#include "ptgnn/ad/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace ptgnn::ad {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

std::string shape_to_string(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_numel(shape_)) {
    throw std::invalid_argument("tensor data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  if (shape_.empty()) return 1;
  throw std::logic_error("rows() on tensor of rank " + std::to_string(shape_.size()));
}

std::size_t Tensor::cols() const {
  if (shape_.size() == 2) return shape_[1];
  if (shape_.size() == 1) return shape_[0];
  if (shape_.empty()) return 1;
  throw std::logic_error("cols() on tensor of rank " + std::to_string(shape_.size()));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw std::logic_error("item() on tensor of shape " + shape_to_string(shape_));
  }
  return data_[0];
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace ptgnn::ad
