#include "ptgnn/ad/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace ptgnn::ad {

FiniteDiffResult finite_diff_check(const ScalarFunction& f, std::span<const double> params, double step,
                                   double floor) {
  std::vector<double> x(params.begin(), params.end());
  std::vector<double> analytic(x.size(), 0.0);
  f(x, analytic);

  FiniteDiffResult result;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double fp = f(x, {});
    x[i] = saved - step;
    const double fm = f(x, {});
    x[i] = saved;
    const double numeric = (fp - fm) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (i == 0 || rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
      result.worst_analytic = analytic[i];
      result.worst_numeric = numeric;
    }
  }
  return result;
}

}  // namespace ptgnn::ad
