#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ptgnn/ad/tape.hpp"

namespace ptgnn::ad {

// Differentiable primitives. Every op validates shapes, records its forward
// value on the tape and registers the exact adjoint.

/// A[m x k] * B[k x n].
Var matmul(Tape& tape, Var a, Var b);
/// X[m x n] + b[1 x n] broadcast over rows.
Var add_bias(Tape& tape, Var x, Var bias);

Var relu(Tape& tape, Var x);
Var tanh(Tape& tape, Var x);
Var sigmoid(Tape& tape, Var x);
Var neg(Tape& tape, Var x);
Var scale(Tape& tape, Var x, double factor);

// Binary ops accept equal shapes, or a one-element operand broadcast against
// the other.
Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);

enum class Elementwise { Relu, Tanh, Sigmoid, Add, Mul, Sub, Neg };
/// Dispatcher over the elementwise family; unary kinds take one argument,
/// binary kinds two.
Var elementwise(Tape& tape, Elementwise f, std::span<const Var> args);

/// Softmax of scores[E x 1] within groups of rows sharing a segment id.
Var segment_softmax(Tape& tape, Var scores, std::span<const std::size_t> segment_of, std::size_t num_segments);
/// Row sums by segment; empty segments give zero rows.
Var segment_sum(Tape& tape, Var values, std::span<const std::size_t> segment_of, std::size_t num_segments);
/// Per-column max by segment; empty segments give zero rows. Ties route the
/// gradient to the lowest row index.
Var segment_max(Tape& tape, Var values, std::span<const std::size_t> segment_of, std::size_t num_segments);

/// axis 0 stacks rows (rank-1 inputs are joined end to end), axis 1 joins columns.
Var concat(Tape& tape, std::span<const Var> parts, std::size_t axis);
Var gather_rows(Tape& tape, Var x, std::span<const std::size_t> index);
/// Mean over all rows -> [1 x d].
Var mean_rows(Tape& tape, Var x);
/// Mean of rows per group -> [num_groups x d]; empty groups give zero rows.
Var mean_rows(Tape& tape, Var x, std::span<const std::size_t> group_of, std::size_t num_groups);
Var sum_all(Tape& tape, Var x);

// Order-independent reductions used by the segment ops; exposed for tests.
double canonical_sum(std::vector<double> terms);

}  // namespace ptgnn::ad
