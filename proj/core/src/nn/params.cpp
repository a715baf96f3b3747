#include "ptgnn/nn/params.hpp"

#include <cmath>
#include <stdexcept>

#include "ptgnn/ad/ops.hpp"
#include "ptgnn/common/rng.hpp"

namespace ptgnn::nn {

std::size_t ModelParams::add(std::string name, ad::Tensor value) {
  blocks_.push_back({std::move(name), std::move(value)});
  return blocks_.size() - 1;
}

std::size_t ModelParams::count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.value.numel();
  return n;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(count());
  for (const auto& b : blocks_) flat.insert(flat.end(), b.value.values().begin(), b.value.values().end());
  return flat;
}

void ModelParams::assign(std::span<const double> flat) {
  if (flat.size() != count()) {
    throw std::invalid_argument("parameter vector has " + std::to_string(flat.size()) + " values, model needs " +
                                std::to_string(count()));
  }
  std::size_t k = 0;
  for (auto& b : blocks_) {
    for (double& v : b.value.values()) v = flat[k++];
  }
}

std::vector<ad::Var> ModelParams::bind(ad::Tape& tape) const {
  std::vector<ad::Var> vars;
  vars.reserve(blocks_.size());
  for (const auto& b : blocks_) vars.push_back(tape.parameter(b.value));
  return vars;
}

std::vector<double> ModelParams::gather_grads(const ad::Tape& tape, std::span<const ad::Var> bound) {
  std::vector<double> flat;
  for (auto v : bound) {
    const ad::Tensor g = tape.grad(v);
    flat.insert(flat.end(), g.values().begin(), g.values().end());
  }
  return flat;
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  if (a.blocks_.size() != b.blocks_.size()) return false;
  for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
    if (a.blocks_[i].name != b.blocks_[i].name || !(a.blocks_[i].value == b.blocks_[i].value)) return false;
  }
  return true;
}

ad::Var Linear::apply(ad::Tape& tape, std::span<const ad::Var> bound, ad::Var x) const {
  return ad::add_bias(tape, ad::matmul(tape, x, bound[weight]), bound[bias]);
}

Linear add_linear(ModelParams& params, const std::string& prefix, std::size_t in, std::size_t out) {
  Linear lin;
  lin.in = in;
  lin.out = out;
  lin.weight = params.add(prefix + ".weight", ad::Tensor::zeros(in, out));
  lin.bias = params.add(prefix + ".bias", ad::Tensor::zeros(1, out));
  return lin;
}

void glorot_init(ModelParams& params, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::Init));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& b = params.block(i);
    const bool is_weight = b.name.ends_with(".weight") && b.value.rank() == 2;
    if (!is_weight) {
      for (double& v : b.value.values()) v = 0.0;
      continue;
    }
    const double a = std::sqrt(6.0 / static_cast<double>(b.value.rows() + b.value.cols()));
    for (double& v : b.value.values()) v = rng.uniform(-a, a);
  }
}

}  // namespace ptgnn::nn
