#include "ptgnn/data/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/kv_file.hpp"

namespace ptgnn::data {

double compute_target_pt(double q_over_pt) {
  if (!std::isfinite(q_over_pt) || q_over_pt == 0.0) {
    throw DataError("q/pT must be finite and non-zero, got " + format_double(q_over_pt));
  }
  return std::abs(1.0 / q_over_pt);
}

double eta_from_theta(double theta, bool* clamped) {
  const double lo = kThetaClampEps;
  const double hi = std::numbers::pi - kThetaClampEps;
  const double t = std::clamp(theta, lo, hi);
  if (clamped) *clamped = t != theta;
  return -std::log(std::tan(t / 2.0));
}

EngineeredEvent engineer_features(const RawEvent& event, EngineeringCounters* counters) {
  EngineeredEvent out;
  out.pt_true = compute_target_pt(event.q_over_pt);
  out.features_full = event.station_features;
  for (std::size_t s = 0; s < kStations; ++s) {
    const double phi = event.station(StationFeature::Phi, s);
    bool clamped = false;
    const double eta = eta_from_theta(event.station(StationFeature::Theta, s), &clamped);
    if (clamped && counters) ++counters->theta_clamps;
    out.phi[s] = phi;
    out.eta[s] = eta;
    out.features_compact[compact_index(s, CompactFeature::SinPhi)] = std::sin(phi);
    out.features_compact[compact_index(s, CompactFeature::CosPhi)] = std::cos(phi);
    out.features_compact[compact_index(s, CompactFeature::Eta)] = eta;
    out.features_compact[compact_index(s, CompactFeature::Bend)] = event.station(StationFeature::Bend, s);
  }
  return out;
}

}  // namespace ptgnn::data
