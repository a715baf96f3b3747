#include "ptgnn/train/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ptgnn::train {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, const AdamConfig& c) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: " + std::to_string(params.size()) + " params, " +
                                std::to_string(grads.size()) + " grads, " + std::to_string(state.m.size()) +
                                " moments");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + c.weight_decay * params[i];
    state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
    state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.eps);
  }
}

PlateauScheduler::PlateauScheduler(SchedulerConfig config, double initial_lr) : config_(config), lr_(initial_lr) {}

double PlateauScheduler::step(double val_loss) {
  if (val_loss < best_ - kThreshold) {
    best_ = val_loss;
    bad_epochs_ = 0;
    return lr_;
  }
  if (++bad_epochs_ >= config_.patience) {
    lr_ = std::max(lr_ * config_.factor, config_.min_lr);
    bad_epochs_ = 0;
  }
  return lr_;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {}

bool EarlyStopping::update(double val_loss) {
  if (val_loss < best_) {
    best_ = val_loss;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

std::size_t early_stop_epoch(std::span<const double> history, std::size_t patience) {
  EarlyStopping es(patience);
  for (std::size_t i = 0; i < history.size(); ++i) {
    es.update(history[i]);
    if (es.should_stop()) return i + 1;
  }
  return history.size();
}

}  // namespace ptgnn::train
