#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/data/event.hpp"
#include "ptgnn/graph/graph.hpp"

namespace ptgnn::graph {

/// Point in the eta-phi plane (unstandardized, phi in radians).
struct EtaPhi {
  double eta = 0.0;
  double phi = 0.0;
};

/// Minimal signed difference phi_j - phi_i, wrapped into (-pi, pi].
double delta_phi(double phi_i, double phi_j);

/// (eta_i - eta_j)^2 + delta_phi^2. Squared, which ranks neighbors the same
/// as the Euclidean distance.
double eta_phi_distance2(const EtaPhi& a, const EtaPhi& b);

/// Directed edges i -> j for the k nearest other points of every i, in
/// source order and then ascending distance; ties go to the lower index.
std::vector<Edge> knn_edges(std::span<const EtaPhi> points, std::size_t k);

/// Standardization parameters for the eta-centric derived quantities, fitted
/// on training events only.
struct EtaGraphStats {
  std::array<double, data::kStations> deta_mean{};
  std::array<double, data::kStations> deta_std{1.0, 1.0, 1.0, 1.0};
  double dphi_mean = 0.0;
  double dphi_std = 1.0;
  double dr2_mean = 0.0;
  double dr2_std = 1.0;
};

/// eta_i - eta_prev along the station sequence; the first station keeps eta_0.
std::array<double, data::kStations> eta_gradient(const data::EngineeredEvent& event);

EtaGraphStats fit_eta_graph_stats(std::span<const data::EngineeredEvent> train, std::size_t knn_k = 3);
void write_eta_graph_stats(KeyValueDoc& doc, const std::string& prefix, const EtaGraphStats& stats);
EtaGraphStats read_eta_graph_stats(const KeyValueDoc& doc, const std::string& prefix);

/// Four station nodes x seven raw features: X[i, j] = f[j * 4 + i].
GraphSample build_station_graph(const data::EngineeredEvent& event, EdgeMode edge_mode = EdgeMode::AsPaper);
/// Seven feature-group nodes x four stations: the transpose of the station matrix.
GraphSample build_feature_graph(const data::EngineeredEvent& event);
/// Fully connected stations with [BA, sin phi, cos phi, eta] nodes and
/// standardized (sin phi, cos phi, eta) differences on edges.
GraphSample build_bending_graph(const data::EngineeredEvent& event);
/// kNN in the eta-phi plane with [eta, sin phi, cos phi, d_eta, BA] nodes and
/// [d_eta, d_phi, dR^2] edges.
GraphSample build_eta_graph(const data::EngineeredEvent& event, const EtaGraphStats& stats, std::size_t knn_k = 3);

GraphSample build_graph(const data::EngineeredEvent& event, const GraphSpec& spec, const EtaGraphStats& stats = {});
/// Output order matches input order.
std::vector<GraphSample> build_graphs(std::span<const data::EngineeredEvent> events, const GraphSpec& spec,
                                      const EtaGraphStats& stats = {});

/// Fixed edge lists of the attribute-free builders.
std::vector<Edge> sequential_chain_edges();
std::vector<Edge> fully_connected_edges(std::size_t n);
std::vector<Edge> feature_hub_edges();

}  // namespace ptgnn::graph
