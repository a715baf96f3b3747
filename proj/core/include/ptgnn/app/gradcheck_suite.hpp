#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ptgnn/nn/config.hpp"

namespace ptgnn::app {

struct GradCheckEntry {
  std::string component;  // "op:<name>", "layer:<name>", "head", "model" or "loss:<name>"
  std::size_t coords = 0;
  std::size_t attempts = 0;  // instances drawn before one cleared the kink margin
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  bool passed = false;
  std::string note;
};

struct GradCheckReport {
  double tolerance = 1e-4;
  std::vector<GradCheckEntry> entries;

  bool all_passed() const;
  std::vector<std::string> failures() const;
};

inline constexpr double kKinkMargin = 1e-4;

/// Finite-difference checks of every differentiable primitive, each backbone
/// layer at the configured widths, the pooling head, the full model and all
/// three losses, on seeded random instances away from kinks.
GradCheckReport run_gradcheck(const nn::ModelConfig& config, std::uint64_t seed, double tolerance = 1e-4);

/// CSV: component,coords,attempts,max_rel_error,worst_index,status,note
void write_gradcheck_report(std::ostream& out, const GradCheckReport& report);

}  // namespace ptgnn::app
