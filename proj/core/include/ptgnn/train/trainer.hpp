#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/graph/graph.hpp"
#include "ptgnn/nn/model.hpp"
#include "ptgnn/train/optim.hpp"

namespace ptgnn::train {

enum class OutputBiasInit { Zero, TargetMean };

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 5e-4;
  std::size_t max_epochs = 50;
  std::size_t batch_size = 32;  // events per optimizer step
  SchedulerConfig scheduler;
  std::size_t early_stop_patience = 7;
  std::uint64_t seed = 1;
  /// Start of the final head bias. TargetMean places initial predictions at the
  /// training mean, above the custom loss's clamp where its gradient vanishes.
  OutputBiasInit output_bias = OutputBiasInit::TargetMean;

  /// Throws UsageError on non-positive rates or zero counts.
  void validate() const;
};

void write_train_config(KeyValueDoc& doc, const TrainConfig& config);
TrainConfig read_train_config(const KeyValueDoc& doc);

/// Sets the final head bias to the mean training target.
void init_output_bias(nn::Model& model, std::span<const graph::GraphSample> train);

struct EpochReport {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_mae = 0.0;
  double learning_rate = 0.0;
  double seconds = 0.0;
  bool improved = false;
};

/// Header and row of the epoch log CSV.
void write_epoch_log_header(std::ostream& out);
void write_epoch_log_row(std::ostream& out, const EpochReport& report);

struct EvalResult {
  double mae = 0.0;
  double loss = 0.0;
  std::vector<double> predictions;
  std::vector<double> residuals;  // truth - prediction
};

/// Predictions, residuals, MAE and mean configured loss over `data`.
/// Predictions pass through loss::reported_prediction first.
/// Throws DataError on an empty set.
EvalResult evaluate(const nn::Model& model, std::span<const graph::GraphSample> data);

struct FitResult {
  nn::ModelParams best_params;
  std::size_t best_epoch = 0;
  double best_val_loss = 0.0;
  std::vector<EpochReport> history;
  bool early_stopped = false;
};

struct FitCallbacks {
  /// Called after every epoch.
  std::function<void(const EpochReport&)> on_epoch;
  /// Called when the validation loss reaches a new minimum, with those parameters.
  std::function<void(const EpochReport&, const nn::ModelParams&)> on_improvement;
};

/// Trains `model` in place from its current parameters, then restores the
/// best-validation parameters into it. Shuffling draws from the Shuffle stream
/// of config.seed. Throws NumericalError naming the sample on a non-finite
/// loss or gradient.
FitResult fit(nn::Model& model, std::span<const graph::GraphSample> train, std::span<const graph::GraphSample> val,
              const TrainConfig& config, const FitCallbacks& callbacks = {});

/// Loss value and flat parameter gradient for one graph.
struct SampleGradient {
  double loss = 0.0;
  double prediction = 0.0;
  std::vector<double> grad;
};
SampleGradient sample_gradient(const nn::Model& model, const graph::GraphSample& graph);

}  // namespace ptgnn::train
