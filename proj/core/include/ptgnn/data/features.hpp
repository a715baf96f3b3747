#pragma once

#include <cstddef>

#include "ptgnn/data/event.hpp"

namespace ptgnn::data {

inline constexpr double kThetaClampEps = 1e-9;

/// |1 / (q/pT)|. Throws DataError for zero or non-finite input.
double compute_target_pt(double q_over_pt);

/// Pseudorapidity -ln(tan(theta / 2)) with theta clamped to
/// [kThetaClampEps, pi - kThetaClampEps]. Sets *clamped when clamping fired.
double eta_from_theta(double theta, bool* clamped = nullptr);

struct EngineeringCounters {
  std::size_t theta_clamps = 0;
};

/// Fills the 28 raw station values, the 16 compact values (sin phi, cos phi,
/// eta, bending angle per station) and the target.
EngineeredEvent engineer_features(const RawEvent& event, EngineeringCounters* counters = nullptr);

}  // namespace ptgnn::data
