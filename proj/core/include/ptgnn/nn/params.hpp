#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptgnn/ad/tape.hpp"
#include "ptgnn/ad/tensor.hpp"

namespace ptgnn::nn {

struct ParamBlock {
  std::string name;
  ad::Tensor value;
};

/// Ordered registry of named parameter tensors. The order is the flat
/// serialization order used by checkpoints and optimizers.
class ModelParams {
 public:
  std::size_t add(std::string name, ad::Tensor value);

  std::size_t size() const { return blocks_.size(); }
  const ParamBlock& block(std::size_t i) const { return blocks_.at(i); }
  ParamBlock& block(std::size_t i) { return blocks_.at(i); }
  std::span<const ParamBlock> blocks() const { return blocks_; }

  /// Total number of scalars.
  std::size_t count() const;
  std::vector<double> flatten() const;
  /// Inverse of flatten(); throws std::invalid_argument on a length mismatch.
  void assign(std::span<const double> flat);

  /// Registers every block on the tape as an external parameter.
  std::vector<ad::Var> bind(ad::Tape& tape) const;
  /// Concatenated gradients of the bound blocks after a backward pass.
  static std::vector<double> gather_grads(const ad::Tape& tape, std::span<const ad::Var> bound);

  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  std::vector<ParamBlock> blocks_;
};

/// Affine map y = x W + b, with W [in x out] and b [1 x out] stored as
/// registry indices.
struct Linear {
  std::size_t weight = 0;
  std::size_t bias = 0;
  std::size_t in = 0;
  std::size_t out = 0;

  ad::Var apply(ad::Tape& tape, std::span<const ad::Var> bound, ad::Var x) const;
};

/// Adds a weight/bias pair named <prefix>.weight / <prefix>.bias, zero-filled.
Linear add_linear(ModelParams& params, const std::string& prefix, std::size_t in, std::size_t out);

/// Fills every rank-2 "*.weight" block with uniform(-a, a), a = sqrt(6 / (rows + cols)),
/// in registry order from one seeded stream, and zeroes everything else.
void glorot_init(ModelParams& params, std::uint64_t seed);

}  // namespace ptgnn::nn
