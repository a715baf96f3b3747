#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ptgnn::ad {

/// Scalar function of a flat parameter vector. Writes its analytic gradient
/// into `grad` when `grad` is non-empty.
using ScalarFunction = std::function<double(std::span<const double> params, std::span<double> grad)>;

struct FiniteDiffResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline constexpr double kGradCheckFloor = 1e-6;

/// Central differences per coordinate against the analytic gradient.
/// Relative error per coordinate is |a - n| / max(|a|, |n|, floor); the floor
/// keeps round-off on near-zero gradients from dominating.
FiniteDiffResult finite_diff_check(const ScalarFunction& f, std::span<const double> params, double step = 1e-5,
                                   double floor = kGradCheckFloor);

}  // namespace ptgnn::ad
