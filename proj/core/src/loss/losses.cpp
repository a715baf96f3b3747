#include "ptgnn/loss/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "ptgnn/common/errors.hpp"

namespace ptgnn::loss {

namespace {

void check_lengths(std::span<const double> pred, std::span<const double> truth, std::span<double> grad) {
  if (pred.size() != truth.size()) {
    throw std::invalid_argument("loss: " + std::to_string(pred.size()) + " predictions for " +
                                std::to_string(truth.size()) + " targets");
  }
  if (pred.empty()) throw std::invalid_argument("loss: empty batch");
  if (!grad.empty() && grad.size() != pred.size()) throw std::invalid_argument("loss: gradient buffer size");
}

}  // namespace

void LossConfig::validate() const {
  if (!(C > 0.0)) throw UsageError("loss.C must be positive");
  if (!(lpl > 0.0)) throw UsageError("loss.lpl must be positive");
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::MSE: return "mse";
    case LossKind::PtInformed: return "pt";
    case LossKind::CustomPt: return "custom";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  for (auto k : {LossKind::MSE, LossKind::PtInformed, LossKind::CustomPt}) {
    if (name == to_string(k)) return k;
  }
  throw UsageError("unknown loss '" + std::string(name) + "' (valid: mse, pt, custom)");
}

void write_loss_config(KeyValueDoc& doc, const LossConfig& config) {
  doc.set("loss.kind", std::string(to_string(config.kind)));
  doc.set("loss.C", config.C);
  doc.set("loss.lpl", config.lpl);
}

LossConfig read_loss_config(const KeyValueDoc& doc) {
  LossConfig c;
  if (doc.contains("loss.kind")) c.kind = parse_loss_kind(doc.get("loss.kind"));
  if (doc.contains("loss.C")) c.C = doc.get_double("loss.C");
  if (doc.contains("loss.lpl")) c.lpl = doc.get_double("loss.lpl");
  c.validate();
  return c;
}

double mse_loss(std::span<const double> pred, std::span<const double> truth, std::span<double> grad) {
  check_lengths(pred, truth, grad);
  const auto n = static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double r = truth[i] - pred[i];
    sum += r * r;
    if (!grad.empty()) grad[i] = 2.0 * (pred[i] - truth[i]) / n;
  }
  return sum / n;
}

double pt_weight(double pt_true) {
  if (!(pt_true > 0.0)) throw std::invalid_argument("pt_weight: pT must be positive");
  if (pt_true < 80.0) return pt_true;
  if (pt_true < 160.0) return 2.4;
  return 2.4 + 10.0;
}

double pt_informed_loss(std::span<const double> pred, std::span<const double> truth, double C,
                        const WeightFunction& weight, std::span<double> grad) {
  check_lengths(pred, truth, grad);
  const double norm = C * static_cast<double>(pred.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double w = weight(truth[i]);
    const double r = truth[i] - pred[i];
    sum += w * r * r;
    if (!grad.empty()) grad[i] = 2.0 * w * (pred[i] - truth[i]) / norm;
  }
  return sum / norm;
}

double pt_informed_loss(std::span<const double> pred, std::span<const double> truth, const LossConfig& config,
                        std::span<double> grad) {
  return pt_informed_loss(pred, truth, config.C, pt_weight, grad);
}

double custom_pt_penalty(double pred_clipped, double lpl) {
  if (pred_clipped <= lpl) return 0.5;
  // sigmoid(z) - 1 == -1 / (1 + e^z), without cancellation for large z.
  const double z = 3.0 * (pred_clipped - lpl);
  return -1.0 / (1.0 + std::exp(z));
}

double custom_pt_loss(std::span<const double> pred_raw, std::span<const double> truth, const LossConfig& config,
                      std::span<double> grad) {
  check_lengths(pred_raw, truth, grad);
  const auto n = static_cast<double>(pred_raw.size());
  const double lpl = config.lpl;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred_raw.size(); ++i) {
    const bool above = pred_raw[i] > lpl;
    const double p = above ? pred_raw[i] : lpl;
    const double r = truth[i] - p;
    sum += r * r + custom_pt_penalty(p, lpl);
    if (!grad.empty()) {
      if (above) {
        const double s = 1.0 / (1.0 + std::exp(-3.0 * (p - lpl)));
        grad[i] = (2.0 * (p - truth[i]) + 3.0 * s * (1.0 - s)) / n;
      } else {
        grad[i] = 0.0;
      }
    }
  }
  return sum / n;
}

double reported_prediction(const LossConfig& config, double pred) {
  return config.kind == LossKind::CustomPt ? std::max(pred, config.lpl) : pred;
}

double compute_loss(const LossConfig& config, std::span<const double> pred, std::span<const double> truth,
                    std::span<double> grad) {
  switch (config.kind) {
    case LossKind::MSE: return mse_loss(pred, truth, grad);
    case LossKind::PtInformed: return pt_informed_loss(pred, truth, config, grad);
    case LossKind::CustomPt: return custom_pt_loss(pred, truth, config, grad);
  }
  throw std::invalid_argument("unknown loss kind");
}

ad::Var loss_on_tape(ad::Tape& tape, ad::Var pred, std::span<const double> truth, const LossConfig& config) {
  const ad::Tensor& pv = tape.value(pred);
  std::vector<double> grad(pv.numel());
  const double value = compute_loss(config, pv.values(), truth, grad);
  return tape.record(ad::OpKind::Loss, ad::Tensor::scalar(value), {pred},
                     [pred, grad = std::move(grad)](ad::Tape& t, const ad::Tensor&, const ad::Tensor& gy) {
                       ad::Tensor g(t.value(pred).shape());
                       for (std::size_t i = 0; i < grad.size(); ++i) g[i] = grad[i] * gy[0];
                       t.accumulate(pred, g);
                     });
}

}  // namespace ptgnn::loss
