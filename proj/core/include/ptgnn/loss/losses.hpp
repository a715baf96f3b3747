#pragma once

#include <functional>
#include <span>
#include <string_view>

#include "ptgnn/ad/tape.hpp"
#include "ptgnn/common/kv_file.hpp"

namespace ptgnn::loss {

enum class LossKind { MSE, PtInformed, CustomPt };

struct LossConfig {
  LossKind kind = LossKind::MSE;
  double C = 250.0;   // PtInformed scaling constant
  double lpl = 2.0;   // CustomPt lower pT limit, GeV/c

  void validate() const;
};

std::string_view to_string(LossKind kind);
/// Accepts mse|pt|custom.
LossKind parse_loss_kind(std::string_view name);

void write_loss_config(KeyValueDoc& doc, const LossConfig& config);
LossConfig read_loss_config(const KeyValueDoc& doc);

// Each loss returns the batch value and, when `grad` is non-empty, writes
// d(loss)/d(pred) into it. Lengths must match and be non-zero.

/// (1/N) sum (truth - pred)^2.
double mse_loss(std::span<const double> pred, std::span<const double> truth, std::span<double> grad = {});

/// Piecewise weight: pT below 80, 2.4 on [80, 160), 12.4 from 160.
double pt_weight(double pt_true);

using WeightFunction = std::function<double(double)>;

/// (1 / (C N)) sum W(truth) (truth - pred)^2.
double pt_informed_loss(std::span<const double> pred, std::span<const double> truth, const LossConfig& config,
                        std::span<double> grad = {});
double pt_informed_loss(std::span<const double> pred, std::span<const double> truth, double C,
                        const WeightFunction& weight, std::span<double> grad = {});

/// +1/2 at or below lpl; sigmoid(3 (pred - lpl)) - 1 above it.
double custom_pt_penalty(double pred_clipped, double lpl);

/// Mean of (truth - max(pred, lpl))^2 + penalty(max(pred, lpl)). The clamp has
/// zero gradient below lpl.
double custom_pt_loss(std::span<const double> pred_raw, std::span<const double> truth, const LossConfig& config,
                      std::span<double> grad = {});

/// The model output as the loss sees it: max(pred, lpl) for the custom loss,
/// unchanged otherwise. Used for reported predictions and MAE.
double reported_prediction(const LossConfig& config, double pred);

/// Dispatches on config.kind.
double compute_loss(const LossConfig& config, std::span<const double> pred, std::span<const double> truth,
                    std::span<double> grad = {});

/// Records the configured loss on a tape for predictions shaped [N x 1].
ad::Var loss_on_tape(ad::Tape& tape, ad::Var pred, std::span<const double> truth, const LossConfig& config);

}  // namespace ptgnn::loss
