#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace ptgnn::train {

struct AdamConfig {
  double learning_rate = 1e-4;
  double weight_decay = 5e-4;  // L2 term added to the gradient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place. Throws std::invalid_argument on a
/// size mismatch.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& config);

struct SchedulerConfig {
  double factor = 0.5;
  std::size_t patience = 3;
  double min_lr = 1e-6;
};

/// Reduce-on-plateau: after `patience` consecutive epochs without an
/// improvement larger than `threshold`, lr <- max(lr * factor, min_lr) and the
/// counter restarts.
class PlateauScheduler {
 public:
  static constexpr double kThreshold = 1e-8;

  PlateauScheduler(SchedulerConfig config, double initial_lr);

  double step(double val_loss);
  double learning_rate() const { return lr_; }
  std::size_t bad_epochs() const { return bad_epochs_; }

 private:
  SchedulerConfig config_;
  double lr_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t bad_epochs_ = 0;
};

/// Tracks the best validation loss; should_stop() once `patience` epochs pass
/// without a strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);

  /// Returns true when val_loss is a new best.
  bool update(double val_loss);
  bool should_stop() const { return since_best_ >= patience_; }
  double best() const { return best_; }
  std::size_t epochs_since_best() const { return since_best_; }

 private:
  std::size_t patience_;
  double best_ = std::numeric_limits<double>::infinity();
  std::size_t since_best_ = 0;
};

/// Epoch (1-based) at which a run with this validation history stops, or
/// history.size() when it never triggers.
std::size_t early_stop_epoch(std::span<const double> history, std::size_t patience);

}  // namespace ptgnn::train
