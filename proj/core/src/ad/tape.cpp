#include "ptgnn/ad/tape.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <stdexcept>
#include <string>
#include <utility>

#include "ptgnn/common/errors.hpp"

namespace ptgnn::ad {

namespace {

constexpr std::array<std::pair<OpKind, std::string_view>, 19> kOpNames{{
    {OpKind::Leaf, "leaf"},
    {OpKind::Matmul, "matmul"},
    {OpKind::AddBias, "add_bias"},
    {OpKind::Relu, "relu"},
    {OpKind::Tanh, "tanh"},
    {OpKind::Sigmoid, "sigmoid"},
    {OpKind::Add, "add"},
    {OpKind::Mul, "mul"},
    {OpKind::Sub, "sub"},
    {OpKind::Neg, "neg"},
    {OpKind::Scale, "scale"},
    {OpKind::SegmentSoftmax, "segment_softmax"},
    {OpKind::SegmentSum, "segment_sum"},
    {OpKind::SegmentMax, "segment_max"},
    {OpKind::Concat, "concat"},
    {OpKind::GatherRows, "gather_rows"},
    {OpKind::MeanRows, "mean_rows"},
    {OpKind::SumAll, "sum_all"},
    {OpKind::Loss, "loss"},
}};

// -1 encodes "no corruption".
std::atomic<int> g_corrupted{-1};

}  // namespace

std::string_view op_name(OpKind kind) {
  for (const auto& [k, name] : kOpNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<OpKind> op_from_name(std::string_view name) {
  for (const auto& [k, n] : kOpNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

namespace testing {

void corrupt_adjoint(std::optional<OpKind> kind) {
  g_corrupted.store(kind ? static_cast<int>(*kind) : -1);
}

std::optional<OpKind> corrupted_adjoint() {
  const int k = g_corrupted.load();
  if (k < 0) return std::nullopt;
  return static_cast<OpKind>(k);
}

}  // namespace testing

Tape::Node& Tape::node(Var v) {
  if (v.id >= nodes_.size()) throw std::out_of_range("invalid tape variable");
  return nodes_[v.id];
}

const Tape::Node& Tape::node(Var v) const {
  if (v.id >= nodes_.size()) throw std::out_of_range("invalid tape variable");
  return nodes_[v.id];
}

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::input(Tensor value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::parameter(const Tensor& external) {
  Node n;
  n.external = &external;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::record(OpKind kind, Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  return record(kind, std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(OpKind kind, Tensor value, const std::vector<Var>& inputs, Backward backward) {
  if (!value.all_finite()) {
    throw NumericalError("non-finite output from op '" + std::string(op_name(kind)) + "'");
  }
  Node n;
  n.kind = kind;
  n.owned = std::move(value);
  for (Var in : inputs) {
    if (node(in).requires_grad) n.requires_grad = true;
  }
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const { return node(v).value(); }

bool Tape::requires_grad(Var v) const { return node(v).requires_grad; }

bool Tape::any_requires_grad(std::initializer_list<Var> vars) const {
  return std::any_of(vars.begin(), vars.end(), [&](Var v) { return node(v).requires_grad; });
}

Tensor Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.has_grad) return n.grad;
  return Tensor(n.value().shape());
}

Tensor* Tape::grad_buffer(Var v) {
  Node& n = node(v);
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value().shape());
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  Tensor* buf = grad_buffer(v);
  if (!buf) return;
  if (buf->numel() != g.numel()) {
    throw std::logic_error("gradient shape " + shape_to_string(g.shape()) + " does not match value shape " +
                           shape_to_string(buf->shape()));
  }
  auto dst = buf->values();
  auto src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var output) {
  Node& out = node(output);
  if (out.value().numel() != 1) {
    throw std::invalid_argument("backward() requires a scalar output, got shape " +
                                shape_to_string(out.value().shape()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  if (!out.requires_grad) return;
  out.grad = Tensor(out.value().shape(), 1.0);
  out.has_grad = true;

  const auto corrupted = testing::corrupted_adjoint();
  for (std::size_t i = output.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    if (corrupted && *corrupted == n.kind) {
      Tensor scaled = n.grad;
      for (double& x : scaled.values()) x *= 1.5;
      n.backward(*this, n.value(), scaled);
    } else {
      // Callbacks only touch inputs (lower ids), so n.grad stays put.
      n.backward(*this, n.value(), n.grad);
    }
  }
}

void Tape::note_kink(double margin) { kink_margin_ = std::min(kink_margin_, margin); }

}  // namespace ptgnn::ad
