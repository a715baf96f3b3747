#include "ptgnn/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/rng.hpp"
#include "ptgnn/loss/losses.hpp"

namespace ptgnn::train {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw UsageError("train.learning_rate must be positive");
  if (!(weight_decay >= 0.0)) throw UsageError("train.weight_decay must be non-negative");
  if (max_epochs == 0) throw UsageError("train.max_epochs must be >= 1");
  if (batch_size == 0) throw UsageError("train.batch_size must be >= 1");
  if (!(scheduler.factor > 0.0 && scheduler.factor <= 1.0)) throw UsageError("train.scheduler.factor must be in (0, 1]");
  if (scheduler.patience == 0) throw UsageError("train.scheduler.patience must be >= 1");
  if (!(scheduler.min_lr > 0.0)) throw UsageError("train.scheduler.min_lr must be positive");
  if (early_stop_patience == 0) throw UsageError("train.early_stop_patience must be >= 1");
}

void write_train_config(KeyValueDoc& doc, const TrainConfig& c) {
  doc.set("train.learning_rate", c.learning_rate);
  doc.set("train.weight_decay", c.weight_decay);
  doc.set("train.max_epochs", std::to_string(c.max_epochs));
  doc.set("train.batch_size", std::to_string(c.batch_size));
  doc.set("train.scheduler.factor", c.scheduler.factor);
  doc.set("train.scheduler.patience", std::to_string(c.scheduler.patience));
  doc.set("train.scheduler.min_lr", c.scheduler.min_lr);
  doc.set("train.early_stop_patience", std::to_string(c.early_stop_patience));
  doc.set("train.seed", std::to_string(c.seed));
  doc.set("train.output_bias", c.output_bias == OutputBiasInit::TargetMean ? "mean" : "zero");
}

TrainConfig read_train_config(const KeyValueDoc& doc) {
  TrainConfig c;
  auto count = [&](const char* key, std::size_t& out) {
    if (!doc.contains(key)) return;
    const long long v = doc.get_int(key);
    if (v < 0) throw UsageError(std::string(key) + " must be non-negative");
    out = static_cast<std::size_t>(v);
  };
  auto real = [&](const char* key, double& out) {
    if (doc.contains(key)) out = doc.get_double(key);
  };
  real("train.learning_rate", c.learning_rate);
  real("train.weight_decay", c.weight_decay);
  count("train.max_epochs", c.max_epochs);
  count("train.batch_size", c.batch_size);
  real("train.scheduler.factor", c.scheduler.factor);
  count("train.scheduler.patience", c.scheduler.patience);
  real("train.scheduler.min_lr", c.scheduler.min_lr);
  count("train.early_stop_patience", c.early_stop_patience);
  if (doc.contains("train.seed")) {
    const long long s = doc.get_int("train.seed");
    if (s < 0) throw UsageError("train.seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (doc.contains("train.output_bias")) {
    const auto& v = doc.get("train.output_bias");
    if (v == "mean") {
      c.output_bias = OutputBiasInit::TargetMean;
    } else if (v == "zero") {
      c.output_bias = OutputBiasInit::Zero;
    } else {
      throw UsageError("unknown train.output_bias '" + v + "' (valid: mean, zero)");
    }
  }
  c.validate();
  return c;
}

void init_output_bias(nn::Model& model, std::span<const graph::GraphSample> train) {
  if (train.empty()) throw DataError("init_output_bias: empty training set");
  double sum = 0.0;
  for (const auto& g : train) sum += g.target_pt;
  auto& params = model.params();
  auto& bias = params.block(params.size() - 1);
  if (!bias.name.ends_with(".bias") || bias.value.numel() != 1) {
    throw std::logic_error("init_output_bias: last parameter block is not the output bias");
  }
  bias.value[0] = sum / static_cast<double>(train.size());
}

void write_epoch_log_header(std::ostream& out) { out << "epoch,train_loss,val_loss,val_mae,lr,seconds\n"; }

void write_epoch_log_row(std::ostream& out, const EpochReport& r) {
  out << r.epoch << ',' << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
      << format_double(r.val_mae) << ',' << format_double(r.learning_rate) << ',' << format_double(r.seconds) << '\n';
}

EvalResult evaluate(const nn::Model& model, std::span<const graph::GraphSample> data) {
  if (data.empty()) throw DataError("evaluate: empty dataset");
  EvalResult r;
  r.predictions.reserve(data.size());
  r.residuals.reserve(data.size());
  std::vector<double> truth;
  truth.reserve(data.size());
  double abs_sum = 0.0;
  const auto& loss_cfg = model.config().loss;
  for (const auto& g : data) {
    const double p = loss::reported_prediction(loss_cfg, model.predict(g));
    r.predictions.push_back(p);
    r.residuals.push_back(g.target_pt - p);
    truth.push_back(g.target_pt);
    abs_sum += std::abs(g.target_pt - p);
  }
  r.mae = abs_sum / static_cast<double>(data.size());
  r.loss = loss::compute_loss(model.config().loss, r.predictions, truth);
  return r;
}

SampleGradient sample_gradient(const nn::Model& model, const graph::GraphSample& graph) {
  ad::Tape tape;
  const auto bound = model.params().bind(tape);
  const ad::Var pred = model.forward(tape, bound, graph);
  const double truth[] = {graph.target_pt};
  const ad::Var loss = loss::loss_on_tape(tape, pred, truth, model.config().loss);
  tape.backward(loss);
  SampleGradient s;
  s.loss = tape.value(loss).item();
  s.prediction = tape.value(pred).item();
  s.grad = nn::ModelParams::gather_grads(tape, bound);
  return s;
}

FitResult fit(nn::Model& model, std::span<const graph::GraphSample> train, std::span<const graph::GraphSample> val,
              const TrainConfig& config, const FitCallbacks& callbacks) {
  config.validate();
  if (train.empty()) throw DataError("fit: empty training set");
  if (val.empty()) throw DataError("fit: empty validation set");
  for (const auto& g : train) nn::check_graph(model.config(), g);
  for (const auto& g : val) nn::check_graph(model.config(), g);

  auto& params = model.params();
  std::vector<double> flat = params.flatten();
  AdamState adam(flat.size());
  AdamConfig adam_config;
  adam_config.learning_rate = config.learning_rate;
  adam_config.weight_decay = config.weight_decay;
  PlateauScheduler scheduler(config.scheduler, config.learning_rate);
  EarlyStopping stopper(config.early_stop_patience);
  Rng shuffle_rng(derive_seed(config.seed, Stream::Shuffle));

  FitResult result;
  result.best_params = params;
  std::vector<std::size_t> order(train.size());
  std::vector<double> grad_sum(flat.size());

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        SampleGradient s;
        try {
          s = sample_gradient(model, train[idx]);
        } catch (const NumericalError& e) {
          throw NumericalError("training sample " + std::to_string(idx) + " (epoch " + std::to_string(epoch) +
                               "): " + e.what());
        }
        if (!std::isfinite(s.loss)) {
          throw NumericalError("non-finite loss on training sample " + std::to_string(idx) + " (epoch " +
                               std::to_string(epoch) + ")");
        }
        for (std::size_t i = 0; i < grad_sum.size(); ++i) {
          if (!std::isfinite(s.grad[i])) {
            throw NumericalError("non-finite gradient on training sample " + std::to_string(idx) + " (epoch " +
                                 std::to_string(epoch) + ")");
          }
          grad_sum[i] += s.grad[i];
        }
        loss_sum += s.loss;
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& g : grad_sum) g *= inv;
      adam_step(flat, grad_sum, adam, adam_config);
      params.assign(flat);
    }

    const EvalResult ev = evaluate(model, val);
    if (!std::isfinite(ev.loss)) throw NumericalError("non-finite validation loss at epoch " + std::to_string(epoch));

    EpochReport report;
    report.epoch = epoch;
    report.train_loss = loss_sum / static_cast<double>(train.size());
    report.val_loss = ev.loss;
    report.val_mae = ev.mae;
    report.learning_rate = adam_config.learning_rate;
    report.improved = stopper.update(ev.loss);
    adam_config.learning_rate = scheduler.step(ev.loss);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (report.improved) {
      result.best_params = params;
      result.best_epoch = epoch;
      result.best_val_loss = ev.loss;
      if (callbacks.on_improvement) callbacks.on_improvement(report, params);
    }
    result.history.push_back(report);
    if (callbacks.on_epoch) callbacks.on_epoch(report);
    if (stopper.should_stop()) {
      result.early_stopped = true;
      break;
    }
  }
  params = result.best_params;
  return result;
}

}  // namespace ptgnn::train
