#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "ptgnn/ad/tensor.hpp"

namespace ptgnn::ad {

enum class OpKind {
  Leaf,
  Matmul,
  AddBias,
  Relu,
  Tanh,
  Sigmoid,
  Add,
  Mul,
  Sub,
  Neg,
  Scale,
  SegmentSoftmax,
  SegmentSum,
  SegmentMax,
  Concat,
  GatherRows,
  MeanRows,
  SumAll,
  Loss,
};

std::string_view op_name(OpKind kind);
std::optional<OpKind> op_from_name(std::string_view name);

/// Handle to a value recorded on a Tape.
struct Var {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::size_t id = kNone;
  bool valid() const { return id != kNone; }
};

/// Records a computation as a list of nodes in creation order (which is a
/// topological order) and replays adjoints in reverse.
class Tape {
 public:
  /// Adjoint callback: receives the node's forward value and the gradient
  /// flowing into it, and accumulates into its inputs via accumulate().
  using Backward = std::function<void(Tape&, const Tensor& value, const Tensor& grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var input(Tensor value);
  /// References an external tensor without copying; it must outlive the tape.
  Var parameter(const Tensor& external);

  /// Adds an op node. Throws NumericalError if the value is not finite.
  Var record(OpKind kind, Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(OpKind kind, Tensor value, const std::vector<Var>& inputs, Backward backward);

  /// Valid until the next node is recorded.
  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;
  bool any_requires_grad(std::initializer_list<Var> vars) const;

  /// Gradient of the last backward() target with respect to v; zeros if v
  /// was not reached.
  Tensor grad(Var v) const;

  /// Adds g into the gradient of v (no-op when v does not require grad).
  void accumulate(Var v, const Tensor& g);
  /// Mutable gradient buffer for scatter-style accumulation, or nullptr.
  Tensor* grad_buffer(Var v);

  /// Reverse pass from a one-element output.
  void backward(Var output);

  /// Smallest distance of any recorded input to a non-differentiable point
  /// (relu at 0, max ties). Finite-difference checks use it to reject samples.
  void note_kink(double margin);
  double kink_margin() const { return kink_margin_; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind = OpKind::Leaf;
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
    const Tensor& value() const { return external ? *external : owned; }
  };

  Node& node(Var v);
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
  double kink_margin_ = std::numeric_limits<double>::infinity();
};

namespace testing {

/// Test hook: scales the incoming gradient of every node of the given kind
/// during backward, corrupting its adjoint. Pass std::nullopt to clear.
void corrupt_adjoint(std::optional<OpKind> kind);
std::optional<OpKind> corrupted_adjoint();

}  // namespace testing

}  // namespace ptgnn::ad
