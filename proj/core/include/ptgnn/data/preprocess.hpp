#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ptgnn/ad/tensor.hpp"
#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/data/event.hpp"

namespace ptgnn::data {

/// Quantile with linear interpolation between closest order statistics:
/// position q * (n - 1) in the sorted sample.
double quantile_linear(std::span<const double> sorted, double q);

struct IqrResult {
  std::vector<std::size_t> kept;  // ascending
  double q1 = 0.0;
  double q3 = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Keeps samples inside the closed interval [Q1 - 1.5 IQR, Q3 + 1.5 IQR].
IqrResult iqr_filter(std::span<const double> values);

/// Column-wise z-score parameters (population standard deviation).
struct FeatureStats {
  static constexpr double kDegenerateStd = 1e-12;

  std::vector<double> means;
  std::vector<double> stds;         // 1.0 for flagged columns
  std::vector<bool> degenerate;     // std below kDegenerateStd at fit time

  std::size_t dim() const { return means.size(); }
};

FeatureStats fit_standardizer(const ad::Tensor& rows);
ad::Tensor apply_standardizer(const FeatureStats& stats, const ad::Tensor& rows);
void standardize_in_place(const FeatureStats& stats, std::span<double> row);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle then cut at floor(train_fraction * n), clamped so both
/// sides are non-empty.
Split train_test_split(std::size_t n, const SplitSpec& spec);

/// Matrix views over a set of engineered events.
ad::Tensor full_matrix(std::span<const EngineeredEvent> events);
ad::Tensor compact_matrix(std::span<const EngineeredEvent> events);

/// Applies both standardizers to every event and marks it standardized.
void standardize_events(std::span<EngineeredEvent> events, const FeatureStats& full, const FeatureStats& compact);

void write_feature_stats(KeyValueDoc& doc, const std::string& prefix, const FeatureStats& stats);
FeatureStats read_feature_stats(const KeyValueDoc& doc, const std::string& prefix);

}  // namespace ptgnn::data
