#include "ptgnn/data/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "ptgnn/common/rng.hpp"

namespace ptgnn::data {

namespace {

constexpr double kPtMin = 2.0;
constexpr double kPtMax = 300.0;
constexpr double kEtaMin = 1.25;
constexpr double kEtaMax = 2.4;

// Relative lever arm of each station along the track.
constexpr std::array<double, kStations> kLever{1.0, 1.6, 2.1, 2.6};
// Bending-angle magnitude per unit 1/pT, largest at the first station.
constexpr std::array<double, kStations> kBendScale{0.6, 0.35, 0.25, 0.2};

constexpr double kPhiDeflection = 0.9;
constexpr double kPhiNoise = 0.002;
constexpr double kThetaDrift = 0.02;
constexpr double kThetaNoise = 0.001;
constexpr double kBendNoise = 0.01;

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, two_pi);
  if (a < 0) a += two_pi;
  return a - std::numbers::pi;
}

}  // namespace

EventTable synth_generate(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, Stream::Synth));
  EventTable table;
  table.rows.reserve(n);
  table.metadata["synth.recipe"] = std::to_string(kSynthRecipeVersion);
  table.metadata["synth.seed"] = std::to_string(seed);
  table.metadata["synth.n"] = std::to_string(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double charge = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double inv_pt = rng.uniform(1.0 / kPtMax, 1.0 / kPtMin);
    const double eta = rng.uniform(kEtaMin, kEtaMax);
    const double theta_track = 2.0 * std::atan(std::exp(-eta));
    const double phi0 = rng.uniform(-std::numbers::pi, std::numbers::pi);

    RawEvent ev;
    std::array<double, kStations> thetas{};
    for (std::size_t s = 0; s < kStations; ++s) {
      const double phi = phi0 + charge * kPhiDeflection * inv_pt * kLever[s] + kPhiNoise * rng.normal();
      const double theta =
          theta_track + kThetaDrift * inv_pt * static_cast<double>(s) + kThetaNoise * rng.normal();
      thetas[s] = theta;
      ev.station(StationFeature::Phi, s) = wrap_angle(phi);
      ev.station(StationFeature::Theta, s) = theta;
      ev.station(StationFeature::Bend, s) = kBendScale[s] * inv_pt + kBendNoise * rng.normal();
      ev.station(StationFeature::Time, s) = rng.normal();
      ev.station(StationFeature::Ring, s) = eta > 1.6 ? 1.0 : 2.0;
      ev.station(StationFeature::Front, s) = rng.uniform() < 0.5 ? 0.0 : 1.0;
      ev.station(StationFeature::Mask, s) = 0.0;
    }
    std::sort(thetas.begin(), thetas.end());
    ev.road_features[0] = std::clamp(std::floor(8.0 * (1.0 - 2.0 * inv_pt)), 0.0, 7.0);
    ev.road_features[1] = std::clamp(std::floor((eta - 1.2) / 0.3), 0.0, 3.0);
    ev.road_features[2] = 0.5 * (thetas[1] + thetas[2]);
    ev.q_over_pt = charge * inv_pt;
    table.rows.push_back(ev);
  }
  return table;
}

}  // namespace ptgnn::data
