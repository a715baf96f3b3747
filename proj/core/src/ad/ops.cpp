#include "ptgnn/ad/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ptgnn::ad {

namespace {

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) + " and " +
                              shape_to_string(b.shape()));
}

void require_rank2(const char* op, const Tensor& t) {
  if (t.rank() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a matrix, got shape " + shape_to_string(t.shape()));
  }
}

void check_segments(const char* op, std::span<const std::size_t> segment_of, std::size_t rows,
                    std::size_t num_segments) {
  if (segment_of.size() != rows) {
    throw std::invalid_argument(std::string(op) + ": " + std::to_string(segment_of.size()) + " segment ids for " +
                                std::to_string(rows) + " rows");
  }
  for (std::size_t s : segment_of) {
    if (s >= num_segments) {
      throw std::out_of_range(std::string(op) + ": segment id " + std::to_string(s) + " >= " +
                              std::to_string(num_segments));
    }
  }
}

std::vector<std::vector<std::size_t>> members_by_segment(std::span<const std::size_t> segment_of,
                                                         std::size_t num_segments) {
  std::vector<std::vector<std::size_t>> members(num_segments);
  for (std::size_t r = 0; r < segment_of.size(); ++r) members[segment_of[r]].push_back(r);
  return members;
}

// C = A * B, optionally transposing either operand; C is overwritten.
void gemm(const Tensor& a, bool ta, const Tensor& b, bool tb, Tensor& c) {
  const std::size_t m = ta ? a.cols() : a.rows();
  const std::size_t k = ta ? a.rows() : a.cols();
  const std::size_t n = tb ? b.rows() : b.cols();
  auto A = a.values();
  auto B = b.values();
  auto C = c.values();
  std::fill(C.begin(), C.end(), 0.0);
  const std::size_t lda = a.cols();
  const std::size_t ldb = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ta ? A[p * lda + i] : A[i * lda + p];
      if (aip == 0.0) continue;
      double* crow = &C[i * n];
      if (!tb) {
        const double* brow = &B[p * ldb];
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) crow[j] += aip * B[j * ldb + p];
      }
    }
  }
}

template <typename F, typename DF>
Var unary(Tape& tape, OpKind kind, Var x, F f, DF df_from_xy) {
  const Tensor& xv = tape.value(x);
  Tensor y(xv.shape());
  for (std::size_t i = 0; i < xv.numel(); ++i) y[i] = f(xv[i]);
  return tape.record(kind, std::move(y), {x}, [x, df_from_xy](Tape& t, const Tensor& yv, const Tensor& gy) {
    const Tensor& xv = t.value(x);
    Tensor gx(xv.shape());
    for (std::size_t i = 0; i < xv.numel(); ++i) gx[i] = gy[i] * df_from_xy(xv[i], yv[i]);
    t.accumulate(x, gx);
  });
}

// Reduces a gradient to the shape of a broadcast operand.
Tensor reduce_to(const Tensor& g, const Tensor& like) {
  if (g.numel() == like.numel()) {
    Tensor out(like.shape());
    std::copy(g.values().begin(), g.values().end(), out.values().begin());
    return out;
  }
  double s = 0.0;
  for (double v : g.values()) s += v;
  Tensor out(like.shape());
  out[0] = s;
  return out;
}

enum class BinaryKind { Add, Sub, Mul };

Var binary(Tape& tape, BinaryKind kind, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  const bool same = av.same_shape(bv);
  const bool a_scalar = av.numel() == 1;
  const bool b_scalar = bv.numel() == 1;
  const char* name = kind == BinaryKind::Add ? "add" : kind == BinaryKind::Sub ? "sub" : "mul";
  if (!same && !a_scalar && !b_scalar) shape_error(name, av, bv);
  const Tensor& big = (same || b_scalar) ? av : bv;
  Tensor y(big.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const double x1 = a_scalar && !same ? av[0] : av[i];
    const double x2 = b_scalar && !same ? bv[0] : bv[i];
    y[i] = kind == BinaryKind::Add ? x1 + x2 : kind == BinaryKind::Sub ? x1 - x2 : x1 * x2;
  }
  const OpKind op = kind == BinaryKind::Add ? OpKind::Add : kind == BinaryKind::Sub ? OpKind::Sub : OpKind::Mul;
  return tape.record(op, std::move(y), {a, b}, [a, b, kind, same, a_scalar, b_scalar](Tape& t, const Tensor&, const Tensor& gy) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    Tensor ga(gy.shape());
    Tensor gb(gy.shape());
    for (std::size_t i = 0; i < gy.numel(); ++i) {
      const double x1 = a_scalar && !same ? av[0] : av[i];
      const double x2 = b_scalar && !same ? bv[0] : bv[i];
      switch (kind) {
        case BinaryKind::Add:
          ga[i] = gy[i];
          gb[i] = gy[i];
          break;
        case BinaryKind::Sub:
          ga[i] = gy[i];
          gb[i] = -gy[i];
          break;
        case BinaryKind::Mul:
          ga[i] = gy[i] * x2;
          gb[i] = gy[i] * x1;
          break;
      }
    }
    if (t.requires_grad(a)) t.accumulate(a, reduce_to(ga, av));
    if (t.requires_grad(b)) t.accumulate(b, reduce_to(gb, bv));
  });
}

}  // namespace

double canonical_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

Var matmul(Tape& tape, Var a, Var b) {
  const Tensor& av = tape.value(a);
  const Tensor& bv = tape.value(b);
  require_rank2("matmul", av);
  require_rank2("matmul", bv);
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  Tensor y({av.rows(), bv.cols()});
  gemm(av, false, bv, false, y);
  return tape.record(OpKind::Matmul, std::move(y), {a, b}, [a, b](Tape& t, const Tensor&, const Tensor& gy) {
    const Tensor& av = t.value(a);
    const Tensor& bv = t.value(b);
    if (t.requires_grad(a)) {
      Tensor ga(av.shape());
      gemm(gy, false, bv, true, ga);
      t.accumulate(a, ga);
    }
    if (t.requires_grad(b)) {
      Tensor gb(bv.shape());
      gemm(av, true, gy, false, gb);
      t.accumulate(b, gb);
    }
  });
}

Var add_bias(Tape& tape, Var x, Var bias) {
  const Tensor& xv = tape.value(x);
  const Tensor& bv = tape.value(bias);
  require_rank2("add_bias", xv);
  if (bv.numel() != xv.cols()) shape_error("add_bias", xv, bv);
  Tensor y = xv;
  for (std::size_t r = 0; r < y.rows(); ++r) {
    for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += bv[c];
  }
  return tape.record(OpKind::AddBias, std::move(y), {x, bias}, [x, bias](Tape& t, const Tensor&, const Tensor& gy) {
    if (t.requires_grad(x)) t.accumulate(x, gy);
    if (Tensor* gb = t.grad_buffer(bias)) {
      for (std::size_t r = 0; r < gy.rows(); ++r) {
        for (std::size_t c = 0; c < gy.cols(); ++c) (*gb)[c] += gy(r, c);
      }
    }
  });
}

Var relu(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  if (tape.requires_grad(x)) {
    for (double v : xv.values()) tape.note_kink(std::abs(v));
  }
  return unary(
      tape, OpKind::Relu, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Tape& tape, Var x) {
  return unary(
      tape, OpKind::Tanh, x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Tape& tape, Var x) {
  return unary(
      tape, OpKind::Sigmoid, x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var neg(Tape& tape, Var x) {
  return unary(
      tape, OpKind::Neg, x, [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Var scale(Tape& tape, Var x, double factor) {
  return unary(
      tape, OpKind::Scale, x, [factor](double v) { return factor * v; }, [factor](double, double) { return factor; });
}

Var add(Tape& tape, Var a, Var b) { return binary(tape, BinaryKind::Add, a, b); }
Var sub(Tape& tape, Var a, Var b) { return binary(tape, BinaryKind::Sub, a, b); }
Var mul(Tape& tape, Var a, Var b) { return binary(tape, BinaryKind::Mul, a, b); }

Var elementwise(Tape& tape, Elementwise f, std::span<const Var> args) {
  const bool is_binary = f == Elementwise::Add || f == Elementwise::Mul || f == Elementwise::Sub;
  if (args.size() != (is_binary ? 2u : 1u)) {
    throw std::invalid_argument("elementwise: wrong number of arguments");
  }
  switch (f) {
    case Elementwise::Relu: return relu(tape, args[0]);
    case Elementwise::Tanh: return tanh(tape, args[0]);
    case Elementwise::Sigmoid: return sigmoid(tape, args[0]);
    case Elementwise::Neg: return neg(tape, args[0]);
    case Elementwise::Add: return add(tape, args[0], args[1]);
    case Elementwise::Mul: return mul(tape, args[0], args[1]);
    case Elementwise::Sub: return sub(tape, args[0], args[1]);
  }
  throw std::invalid_argument("elementwise: unknown function");
}

Var segment_softmax(Tape& tape, Var scores, std::span<const std::size_t> segment_of, std::size_t num_segments) {
  const Tensor& sv = tape.value(scores);
  if (sv.numel() != segment_of.size() || (sv.rank() == 2 && sv.cols() != 1)) {
    throw std::invalid_argument("segment_softmax: expected [E x 1] scores, got " + shape_to_string(sv.shape()));
  }
  check_segments("segment_softmax", segment_of, sv.numel(), num_segments);
  auto members = members_by_segment(segment_of, num_segments);
  Tensor y(sv.shape());
  for (const auto& rows : members) {
    if (rows.empty()) continue;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t r : rows) mx = std::max(mx, sv[r]);
    std::vector<double> exps;
    exps.reserve(rows.size());
    for (std::size_t r : rows) {
      y[r] = std::exp(sv[r] - mx);
      exps.push_back(y[r]);
    }
    const double denom = canonical_sum(std::move(exps));
    for (std::size_t r : rows) y[r] /= denom;
  }
  return tape.record(OpKind::SegmentSoftmax, std::move(y), {scores},
                     [scores, members = std::move(members)](Tape& t, const Tensor& yv, const Tensor& gy) {
                       Tensor gs(yv.shape());
                       for (const auto& rows : members) {
                         std::vector<double> terms;
                         terms.reserve(rows.size());
                         for (std::size_t r : rows) terms.push_back(yv[r] * gy[r]);
                         const double dot = canonical_sum(std::move(terms));
                         for (std::size_t r : rows) gs[r] = yv[r] * (gy[r] - dot);
                       }
                       t.accumulate(scores, gs);
                     });
}

Var segment_sum(Tape& tape, Var values, std::span<const std::size_t> segment_of, std::size_t num_segments) {
  const Tensor& v = tape.value(values);
  require_rank2("segment_sum", v);
  check_segments("segment_sum", segment_of, v.rows(), num_segments);
  const std::size_t d = v.cols();
  Tensor y({num_segments, d});
  auto members = members_by_segment(segment_of, num_segments);
  std::vector<double> terms;
  for (std::size_t s = 0; s < num_segments; ++s) {
    const auto& rows = members[s];
    if (rows.empty()) continue;
    for (std::size_t c = 0; c < d; ++c) {
      terms.clear();
      for (std::size_t r : rows) terms.push_back(v(r, c));
      y(s, c) = canonical_sum(terms);
    }
  }
  std::vector<std::size_t> seg(segment_of.begin(), segment_of.end());
  return tape.record(OpKind::SegmentSum, std::move(y), {values},
                     [values, seg = std::move(seg)](Tape& t, const Tensor&, const Tensor& gy) {
                       Tensor* gv = t.grad_buffer(values);
                       const std::size_t d = gy.cols();
                       for (std::size_t r = 0; r < seg.size(); ++r) {
                         for (std::size_t c = 0; c < d; ++c) (*gv)(r, c) += gy(seg[r], c);
                       }
                     });
}

Var segment_max(Tape& tape, Var values, std::span<const std::size_t> segment_of, std::size_t num_segments) {
  const Tensor& v = tape.value(values);
  require_rank2("segment_max", v);
  check_segments("segment_max", segment_of, v.rows(), num_segments);
  const std::size_t d = v.cols();
  Tensor y({num_segments, d});
  std::vector<std::size_t> argmax(num_segments * d, Var::kNone);
  auto members = members_by_segment(segment_of, num_segments);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < num_segments; ++s) {
    const auto& rows = members[s];
    if (rows.empty()) continue;
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t best = rows.front();
      double second = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 1; k < rows.size(); ++k) {
        const std::size_t r = rows[k];
        // Lowest row index wins ties; rows are visited in ascending order.
        if (v(r, c) > v(best, c)) {
          second = v(best, c);
          best = r;
        } else {
          second = std::max(second, v(r, c));
        }
      }
      if (rows.size() > 1) margin = std::min(margin, v(best, c) - second);
      y(s, c) = v(best, c);
      argmax[s * d + c] = best;
    }
  }
  if (tape.requires_grad(values)) tape.note_kink(margin);
  return tape.record(OpKind::SegmentMax, std::move(y), {values},
                     [values, argmax = std::move(argmax), d](Tape& t, const Tensor&, const Tensor& gy) {
                       Tensor* gv = t.grad_buffer(values);
                       for (std::size_t i = 0; i < argmax.size(); ++i) {
                         if (argmax[i] == Var::kNone) continue;
                         (*gv)(argmax[i], i % d) += gy[i];
                       }
                     });
}

Var concat(Tape& tape, std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  if (axis > 1) throw std::invalid_argument("concat: axis must be 0 or 1");
  const Tensor& first = tape.value(parts[0]);
  const bool flat = axis == 0 && first.rank() == 1;
  std::vector<Var> inputs(parts.begin(), parts.end());

  if (flat) {
    std::vector<double> data;
    for (Var p : parts) {
      const Tensor& pv = tape.value(p);
      if (pv.rank() != 1) shape_error("concat", first, pv);
      data.insert(data.end(), pv.values().begin(), pv.values().end());
    }
    const std::size_t n = data.size();
    return tape.record(OpKind::Concat, Tensor({n}, std::move(data)), inputs,
                       [inputs](Tape& t, const Tensor&, const Tensor& gy) {
                         std::size_t offset = 0;
                         for (Var p : inputs) {
                           const std::size_t n = t.value(p).numel();
                           if (Tensor* g = t.grad_buffer(p)) {
                             for (std::size_t i = 0; i < n; ++i) (*g)[i] += gy[offset + i];
                           }
                           offset += n;
                         }
                       });
  }

  require_rank2("concat", first);
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (Var p : parts) {
    const Tensor& pv = tape.value(p);
    require_rank2("concat", pv);
    if (axis == 0) {
      if (pv.cols() != first.cols()) shape_error("concat", first, pv);
      rows += pv.rows();
    } else {
      if (pv.rows() != first.rows()) shape_error("concat", first, pv);
      cols += pv.cols();
    }
  }
  if (axis == 0) cols = first.cols();
  else rows = first.rows();

  Tensor y({rows, cols});
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor& pv = tape.value(p);
    for (std::size_t r = 0; r < pv.rows(); ++r) {
      for (std::size_t c = 0; c < pv.cols(); ++c) {
        if (axis == 0) y(offset + r, c) = pv(r, c);
        else y(r, offset + c) = pv(r, c);
      }
    }
    offset += axis == 0 ? pv.rows() : pv.cols();
  }
  return tape.record(OpKind::Concat, std::move(y), inputs, [inputs, axis](Tape& t, const Tensor&, const Tensor& gy) {
    std::size_t offset = 0;
    for (Var p : inputs) {
      const Tensor& pv = t.value(p);
      if (Tensor* g = t.grad_buffer(p)) {
        for (std::size_t r = 0; r < pv.rows(); ++r) {
          for (std::size_t c = 0; c < pv.cols(); ++c) {
            (*g)(r, c) += axis == 0 ? gy(offset + r, c) : gy(r, offset + c);
          }
        }
      }
      offset += axis == 0 ? pv.rows() : pv.cols();
    }
  });
}

Var gather_rows(Tape& tape, Var x, std::span<const std::size_t> index) {
  const Tensor& xv = tape.value(x);
  require_rank2("gather_rows", xv);
  const std::size_t d = xv.cols();
  Tensor y({index.size(), d});
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= xv.rows()) {
      throw std::out_of_range("gather_rows: row " + std::to_string(index[i]) + " >= " + std::to_string(xv.rows()));
    }
    for (std::size_t c = 0; c < d; ++c) y(i, c) = xv(index[i], c);
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  return tape.record(OpKind::GatherRows, std::move(y), {x}, [x, idx = std::move(idx)](Tape& t, const Tensor&, const Tensor& gy) {
    Tensor* gx = t.grad_buffer(x);
    const std::size_t d = gy.cols();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t c = 0; c < d; ++c) (*gx)(idx[i], c) += gy(i, c);
    }
  });
}

Var mean_rows(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  std::vector<std::size_t> groups(xv.rows(), 0);
  return mean_rows(tape, x, groups, 1);
}

Var mean_rows(Tape& tape, Var x, std::span<const std::size_t> group_of, std::size_t num_groups) {
  const Tensor& xv = tape.value(x);
  require_rank2("mean_rows", xv);
  check_segments("mean_rows", group_of, xv.rows(), num_groups);
  const std::size_t d = xv.cols();
  std::vector<double> counts(num_groups, 0.0);
  for (std::size_t g : group_of) counts[g] += 1.0;
  Tensor y({num_groups, d});
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    for (std::size_t c = 0; c < d; ++c) y(group_of[r], c) += xv(r, c);
  }
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (counts[g] == 0.0) continue;
    for (std::size_t c = 0; c < d; ++c) y(g, c) /= counts[g];
  }
  std::vector<std::size_t> grp(group_of.begin(), group_of.end());
  return tape.record(OpKind::MeanRows, std::move(y), {x},
                     [x, grp = std::move(grp), counts = std::move(counts)](Tape& t, const Tensor&, const Tensor& gy) {
                       Tensor* gx = t.grad_buffer(x);
                       const std::size_t d = gy.cols();
                       for (std::size_t r = 0; r < grp.size(); ++r) {
                         for (std::size_t c = 0; c < d; ++c) (*gx)(r, c) += gy(grp[r], c) / counts[grp[r]];
                       }
                     });
}

Var sum_all(Tape& tape, Var x) {
  const Tensor& xv = tape.value(x);
  double s = 0.0;
  for (double v : xv.values()) s += v;
  return tape.record(OpKind::SumAll, Tensor::scalar(s), {x}, [x](Tape& t, const Tensor&, const Tensor& gy) {
    t.accumulate(x, Tensor(t.value(x).shape(), gy[0]));
  });
}

}  // namespace ptgnn::ad
