#include "ptgnn/graph/builders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ptgnn/common/errors.hpp"

namespace ptgnn::graph {

using data::CompactFeature;
using data::compact_index;
using data::kStations;

namespace {

void require_standardized(const data::EngineeredEvent& event) {
  if (!event.standardized) {
    throw std::invalid_argument("graph builders require standardized features");
  }
}

std::vector<std::string> station_names() {
  std::vector<std::string> names;
  for (int label : data::kStationLabels) names.push_back("station" + std::to_string(label));
  return names;
}

double compact(const data::EngineeredEvent& ev, std::size_t s, CompactFeature f) {
  return ev.features_compact[compact_index(s, f)];
}

double sample_std(double sum, double sum_sq, double n) {
  const double mean = sum / n;
  const double var = std::max(sum_sq / n - mean * mean, 0.0);
  const double sd = std::sqrt(var);
  return sd < 1e-12 ? 1.0 : sd;
}

}  // namespace

double delta_phi(double phi_i, double phi_j) {
  constexpr double pi = std::numbers::pi;
  double d = std::fmod(phi_j - phi_i, 2.0 * pi);
  if (d > pi) d -= 2.0 * pi;
  if (d <= -pi) d += 2.0 * pi;
  return d;
}

double eta_phi_distance2(const EtaPhi& a, const EtaPhi& b) {
  const double de = a.eta - b.eta;
  const double dp = delta_phi(a.phi, b.phi);
  return de * de + dp * dp;
}

std::vector<Edge> knn_edges(std::span<const EtaPhi> points, std::size_t k) {
  const std::size_t n = points.size();
  if (k >= n) {
    throw std::invalid_argument("knn_edges: k = " + std::to_string(k) + " must be below the point count " +
                                std::to_string(n));
  }
  std::vector<Edge> edges;
  edges.reserve(n * k);
  std::vector<std::size_t> others;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      others.push_back(j);
      dist[j] = eta_phi_distance2(points[i], points[j]);
    }
    std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    for (std::size_t r = 0; r < k; ++r) edges.push_back({i, others[r]});
  }
  return edges;
}

std::array<double, kStations> eta_gradient(const data::EngineeredEvent& event) {
  std::array<double, kStations> d{};
  d[0] = event.eta[0];
  for (std::size_t s = 1; s < kStations; ++s) d[s] = event.eta[s] - event.eta[s - 1];
  return d;
}

EtaGraphStats fit_eta_graph_stats(std::span<const data::EngineeredEvent> train, std::size_t knn_k) {
  if (train.empty()) throw DataError("fit_eta_graph_stats: no training events");
  EtaGraphStats st;
  std::array<double, kStations> sum{}, sum_sq{};
  double phi_sum = 0, phi_sq = 0, dr_sum = 0, dr_sq = 0, edge_count = 0;
  for (const auto& ev : train) {
    const auto grad = eta_gradient(ev);
    for (std::size_t s = 0; s < kStations; ++s) {
      sum[s] += grad[s];
      sum_sq[s] += grad[s] * grad[s];
    }
    std::array<EtaPhi, kStations> pts{};
    for (std::size_t s = 0; s < kStations; ++s) pts[s] = {ev.eta[s], ev.phi[s]};
    for (const auto& e : knn_edges(pts, knn_k)) {
      const double dp = delta_phi(pts[e.src].phi, pts[e.dst].phi);
      const double dr2 = eta_phi_distance2(pts[e.src], pts[e.dst]);
      phi_sum += dp;
      phi_sq += dp * dp;
      dr_sum += dr2;
      dr_sq += dr2 * dr2;
      edge_count += 1;
    }
  }
  const auto n = static_cast<double>(train.size());
  for (std::size_t s = 0; s < kStations; ++s) {
    st.deta_mean[s] = sum[s] / n;
    st.deta_std[s] = sample_std(sum[s], sum_sq[s], n);
  }
  st.dphi_mean = phi_sum / edge_count;
  st.dphi_std = sample_std(phi_sum, phi_sq, edge_count);
  st.dr2_mean = dr_sum / edge_count;
  st.dr2_std = sample_std(dr_sum, dr_sq, edge_count);
  return st;
}

void write_eta_graph_stats(KeyValueDoc& doc, const std::string& prefix, const EtaGraphStats& stats) {
  doc.set(prefix + ".deta_mean", stats.deta_mean);
  doc.set(prefix + ".deta_std", stats.deta_std);
  doc.set(prefix + ".dphi_mean", stats.dphi_mean);
  doc.set(prefix + ".dphi_std", stats.dphi_std);
  doc.set(prefix + ".dr2_mean", stats.dr2_mean);
  doc.set(prefix + ".dr2_std", stats.dr2_std);
}

EtaGraphStats read_eta_graph_stats(const KeyValueDoc& doc, const std::string& prefix) {
  EtaGraphStats st;
  const auto mean = doc.get_doubles(prefix + ".deta_mean");
  const auto sd = doc.get_doubles(prefix + ".deta_std");
  if (mean.size() != kStations || sd.size() != kStations) {
    throw DataError("stats '" + prefix + "': expected " + std::to_string(kStations) + " eta-gradient entries");
  }
  std::copy(mean.begin(), mean.end(), st.deta_mean.begin());
  std::copy(sd.begin(), sd.end(), st.deta_std.begin());
  st.dphi_mean = doc.get_double(prefix + ".dphi_mean");
  st.dphi_std = doc.get_double(prefix + ".dphi_std");
  st.dr2_mean = doc.get_double(prefix + ".dr2_mean");
  st.dr2_std = doc.get_double(prefix + ".dr2_std");
  return st;
}

std::vector<Edge> sequential_chain_edges() { return {{0, 1}, {1, 2}, {2, 3}, {3, 2}, {2, 1}, {1, 0}}; }

std::vector<Edge> fully_connected_edges(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) edges.push_back({i, j});
    }
  }
  return edges;
}

std::vector<Edge> feature_hub_edges() {
  return {{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}, {0, 2},
          {2, 0}, {2, 4}, {4, 2}, {2, 5}, {5, 2}, {2, 6}, {6, 2}};
}

GraphSample build_station_graph(const data::EngineeredEvent& event, EdgeMode edge_mode) {
  require_standardized(event);
  GraphSample g;
  g.method = GraphMethod::StationNode;
  g.node_features = ad::Tensor({kStations, data::kStationFeatures});
  for (std::size_t i = 0; i < kStations; ++i) {
    for (std::size_t j = 0; j < data::kStationFeatures; ++j) {
      g.node_features(i, j) = event.features_full[j * kStations + i];
    }
  }
  g.edges = edge_mode == EdgeMode::FullyConnected ? fully_connected_edges(kStations) : sequential_chain_edges();
  g.target_pt = event.pt_true;
  for (std::size_t s = 0; s < kStations; ++s) g.node_names.push_back("station" + std::to_string(s));
  return g;
}

GraphSample build_feature_graph(const data::EngineeredEvent& event) {
  require_standardized(event);
  GraphSample g;
  g.method = GraphMethod::FeatureNode;
  g.node_features = ad::Tensor({data::kStationFeatures, kStations});
  // M[s, j] = f[j * 4 + s]; nodes are rows of M^T.
  for (std::size_t j = 0; j < data::kStationFeatures; ++j) {
    for (std::size_t s = 0; s < kStations; ++s) g.node_features(j, s) = event.features_full[j * kStations + s];
  }
  g.edges = feature_hub_edges();
  g.target_pt = event.pt_true;
  g.node_names = {"phi", "theta", "bend", "time", "ring", "front", "mask"};
  return g;
}

GraphSample build_bending_graph(const data::EngineeredEvent& event) {
  require_standardized(event);
  GraphSample g;
  g.method = GraphMethod::BendingCentric;
  g.node_features = ad::Tensor({kStations, 4});
  for (std::size_t s = 0; s < kStations; ++s) {
    g.node_features(s, 0) = compact(event, s, CompactFeature::Bend);
    g.node_features(s, 1) = compact(event, s, CompactFeature::SinPhi);
    g.node_features(s, 2) = compact(event, s, CompactFeature::CosPhi);
    g.node_features(s, 3) = compact(event, s, CompactFeature::Eta);
  }
  g.edges = fully_connected_edges(kStations);
  g.edge_attr = ad::Tensor({g.edges.size(), 3});
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [i, j] = g.edges[e];
    g.edge_attr(e, 0) = compact(event, j, CompactFeature::SinPhi) - compact(event, i, CompactFeature::SinPhi);
    g.edge_attr(e, 1) = compact(event, j, CompactFeature::CosPhi) - compact(event, i, CompactFeature::CosPhi);
    g.edge_attr(e, 2) = compact(event, j, CompactFeature::Eta) - compact(event, i, CompactFeature::Eta);
  }
  g.target_pt = event.pt_true;
  g.node_names = station_names();
  return g;
}

GraphSample build_eta_graph(const data::EngineeredEvent& event, const EtaGraphStats& stats, std::size_t knn_k) {
  require_standardized(event);
  GraphSample g;
  g.method = GraphMethod::EtaCentric;
  const auto grad = eta_gradient(event);
  g.node_features = ad::Tensor({kStations, 5});
  for (std::size_t s = 0; s < kStations; ++s) {
    g.node_features(s, 0) = compact(event, s, CompactFeature::Eta);
    g.node_features(s, 1) = compact(event, s, CompactFeature::SinPhi);
    g.node_features(s, 2) = compact(event, s, CompactFeature::CosPhi);
    g.node_features(s, 3) = (grad[s] - stats.deta_mean[s]) / stats.deta_std[s];
    g.node_features(s, 4) = compact(event, s, CompactFeature::Bend);
  }
  std::array<EtaPhi, kStations> pts{};
  for (std::size_t s = 0; s < kStations; ++s) pts[s] = {event.eta[s], event.phi[s]};
  g.edges = knn_edges(pts, knn_k);
  g.edge_attr = ad::Tensor({g.edges.size(), 3});
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const auto [i, j] = g.edges[e];
    const double dp = delta_phi(pts[i].phi, pts[j].phi);
    const double dr2 = eta_phi_distance2(pts[i], pts[j]);
    g.edge_attr(e, 0) = compact(event, j, CompactFeature::Eta) - compact(event, i, CompactFeature::Eta);
    g.edge_attr(e, 1) = (dp - stats.dphi_mean) / stats.dphi_std;
    g.edge_attr(e, 2) = (dr2 - stats.dr2_mean) / stats.dr2_std;
  }
  g.target_pt = event.pt_true;
  g.node_names = station_names();
  return g;
}

GraphSample build_graph(const data::EngineeredEvent& event, const GraphSpec& spec, const EtaGraphStats& stats) {
  switch (spec.method) {
    case GraphMethod::StationNode: return build_station_graph(event, spec.edge_mode);
    case GraphMethod::FeatureNode: return build_feature_graph(event);
    case GraphMethod::BendingCentric: return build_bending_graph(event);
    case GraphMethod::EtaCentric: return build_eta_graph(event, stats, spec.knn_k);
  }
  throw std::invalid_argument("unknown graph method");
}

std::vector<GraphSample> build_graphs(std::span<const data::EngineeredEvent> events, const GraphSpec& spec,
                                      const EtaGraphStats& stats) {
  validate_spec(spec);
  std::vector<GraphSample> out;
  out.reserve(events.size());
  for (const auto& ev : events) out.push_back(build_graph(ev, spec, stats));
  return out;
}

}  // namespace ptgnn::graph
