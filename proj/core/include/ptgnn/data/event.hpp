#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace ptgnn::data {

inline constexpr std::size_t kStations = 4;
inline constexpr std::size_t kStationFeatures = 7;
inline constexpr std::size_t kFullFeatures = kStations * kStationFeatures;  // 28
inline constexpr std::size_t kRoadFeatures = 3;
inline constexpr std::size_t kRawFeatures = kFullFeatures + kRoadFeatures;  // 31
inline constexpr std::size_t kCompactPerStation = 4;
inline constexpr std::size_t kCompactFeatures = kStations * kCompactPerStation;  // 16

/// Per-station raw feature groups, in canonical column order.
enum class StationFeature : std::size_t { Phi = 0, Theta, Bend, Time, Ring, Front, Mask };

/// Detector station labels carried by the four station slots, in order.
inline constexpr std::array<int, kStations> kStationLabels{0, 2, 3, 4};

/// Offsets within one station's block of features_compact.
enum class CompactFeature : std::size_t { SinPhi = 0, CosPhi, Eta, Bend };

/// Feature-major index of a raw station value: all stations of group 0, then group 1, ...
constexpr std::size_t full_index(StationFeature f, std::size_t station) {
  return static_cast<std::size_t>(f) * kStations + station;
}

constexpr std::size_t compact_index(std::size_t station, CompactFeature f) {
  return station * kCompactPerStation + static_cast<std::size_t>(f);
}

struct RawEvent {
  std::array<double, kFullFeatures> station_features{};  // feature-major
  std::array<double, kRoadFeatures> road_features{};     // straightness, zone, median theta
  double q_over_pt = 0.0;                                // (GeV/c)^-1

  double station(StationFeature f, std::size_t s) const { return station_features[full_index(f, s)]; }
  double& station(StationFeature f, std::size_t s) { return station_features[full_index(f, s)]; }
};

struct EventTable {
  std::vector<RawEvent> rows;
  std::size_t dropped = 0;  // rows rejected for a zero or non-finite q/pT
  std::map<std::string, std::string> metadata;
};

struct EngineeredEvent {
  double pt_true = 0.0;  // GeV/c
  std::array<double, kFullFeatures> features_full{};
  std::array<double, kCompactFeatures> features_compact{};
  // Unstandardized angles kept for geometric neighbor search.
  std::array<double, kStations> phi{};
  std::array<double, kStations> eta{};
  /// Set once features_full/features_compact have gone through the standardizer.
  bool standardized = false;
};

/// Canonical CSV header: 28 station columns, 3 road columns, q_over_pt.
const std::vector<std::string>& canonical_columns();

}  // namespace ptgnn::data
