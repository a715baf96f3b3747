#include "ptgnn/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/rng.hpp"

namespace ptgnn::data {

double quantile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

IqrResult iqr_filter(std::span<const double> values) {
  if (values.empty()) throw DataError("iqr_filter: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  IqrResult r;
  r.q1 = quantile_linear(sorted, 0.25);
  r.q3 = quantile_linear(sorted, 0.75);
  const double iqr = r.q3 - r.q1;
  r.lower = r.q1 - 1.5 * iqr;
  r.upper = r.q3 + 1.5 * iqr;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] >= r.lower && values[i] <= r.upper) r.kept.push_back(i);
  }
  return r;
}

FeatureStats fit_standardizer(const ad::Tensor& rows) {
  const std::size_t n = rows.rows();
  const std::size_t d = rows.cols();
  if (n == 0) throw DataError("fit_standardizer: no rows");
  FeatureStats s;
  s.means.assign(d, 0.0);
  s.stds.assign(d, 0.0);
  s.degenerate.assign(d, false);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) s.means[c] += rows(r, c);
  }
  for (auto& m : s.means) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      const double dev = rows(r, c) - s.means[c];
      s.stds[c] += dev * dev;
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    s.stds[c] = std::sqrt(s.stds[c] / static_cast<double>(n));
    if (s.stds[c] < FeatureStats::kDegenerateStd) {
      s.stds[c] = 1.0;
      s.degenerate[c] = true;
    }
  }
  return s;
}

void standardize_in_place(const FeatureStats& stats, std::span<double> row) {
  if (row.size() != stats.dim()) {
    throw DataError("standardizer dimension mismatch: stats " + std::to_string(stats.dim()) + ", row " +
                    std::to_string(row.size()));
  }
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - stats.means[c]) / stats.stds[c];
}

ad::Tensor apply_standardizer(const FeatureStats& stats, const ad::Tensor& rows) {
  if (rows.cols() != stats.dim()) {
    throw DataError("standardizer dimension mismatch: stats " + std::to_string(stats.dim()) + ", matrix " +
                    std::to_string(rows.cols()));
  }
  ad::Tensor out = rows;
  for (std::size_t r = 0; r < out.rows(); ++r) standardize_in_place(stats, out.row(r));
  return out;
}

Split train_test_split(std::size_t n, const SplitSpec& spec) {
  if (n < 2) throw DataError("train_test_split: need at least 2 samples, got " + std::to_string(n));
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DataError("train_test_split: train fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(spec.seed);
  rng.shuffle(order);
  auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

ad::Tensor full_matrix(std::span<const EngineeredEvent> events) {
  ad::Tensor m({events.size(), kFullFeatures});
  for (std::size_t r = 0; r < events.size(); ++r) {
    std::copy(events[r].features_full.begin(), events[r].features_full.end(), m.row(r).begin());
  }
  return m;
}

ad::Tensor compact_matrix(std::span<const EngineeredEvent> events) {
  ad::Tensor m({events.size(), kCompactFeatures});
  for (std::size_t r = 0; r < events.size(); ++r) {
    std::copy(events[r].features_compact.begin(), events[r].features_compact.end(), m.row(r).begin());
  }
  return m;
}

void standardize_events(std::span<EngineeredEvent> events, const FeatureStats& full, const FeatureStats& compact) {
  for (auto& ev : events) {
    standardize_in_place(full, ev.features_full);
    standardize_in_place(compact, ev.features_compact);
    ev.standardized = true;
  }
}

void write_feature_stats(KeyValueDoc& doc, const std::string& prefix, const FeatureStats& stats) {
  doc.set(prefix + ".mean", stats.means);
  doc.set(prefix + ".std", stats.stds);
  std::vector<double> flags(stats.degenerate.size());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = stats.degenerate[i] ? 1.0 : 0.0;
  doc.set(prefix + ".degenerate", flags);
}

FeatureStats read_feature_stats(const KeyValueDoc& doc, const std::string& prefix) {
  FeatureStats s;
  s.means = doc.get_doubles(prefix + ".mean");
  s.stds = doc.get_doubles(prefix + ".std");
  const auto flags = doc.get_doubles(prefix + ".degenerate");
  if (s.stds.size() != s.means.size() || flags.size() != s.means.size()) {
    throw DataError("stats '" + prefix + "': inconsistent lengths");
  }
  for (double f : flags) s.degenerate.push_back(f != 0.0);
  for (double sd : s.stds) {
    if (!(sd > 0.0)) throw DataError("stats '" + prefix + "': non-positive std");
  }
  return s;
}

}  // namespace ptgnn::data
