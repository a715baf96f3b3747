#include "ptgnn/graph/graph.hpp"

#include <stdexcept>

#include "ptgnn/common/errors.hpp"

namespace ptgnn::graph {

void GraphSample::validate() const {
  const std::size_t n = num_nodes();
  if (n != 4 && n != 7) {
    throw std::invalid_argument("graph has " + std::to_string(n) + " nodes, expected 4 or 7");
  }
  for (const auto& e : edges) {
    if (e.src >= n || e.dst >= n) {
      throw std::invalid_argument("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                                  ") out of range for " + std::to_string(n) + " nodes");
    }
    if (e.src == e.dst) throw std::invalid_argument("self-loop on node " + std::to_string(e.src));
  }
  if (has_edge_attr() && edge_attr.rows() != edges.size()) {
    throw std::invalid_argument("edge_attr has " + std::to_string(edge_attr.rows()) + " rows for " +
                                std::to_string(edges.size()) + " edges");
  }
  if (!(target_pt > 0.0)) throw std::invalid_argument("target pT must be positive");
}

std::size_t num_nodes(GraphMethod method) { return method == GraphMethod::FeatureNode ? 7 : 4; }

std::size_t node_dim(GraphMethod method) {
  switch (method) {
    case GraphMethod::StationNode: return 7;
    case GraphMethod::FeatureNode: return 4;
    case GraphMethod::BendingCentric: return 4;
    case GraphMethod::EtaCentric: return 5;
  }
  return 0;
}

std::size_t edge_dim(GraphMethod method) {
  return method == GraphMethod::BendingCentric || method == GraphMethod::EtaCentric ? 3 : 0;
}

std::string_view to_string(GraphMethod method) {
  switch (method) {
    case GraphMethod::StationNode: return "station";
    case GraphMethod::FeatureNode: return "feature";
    case GraphMethod::BendingCentric: return "bending";
    case GraphMethod::EtaCentric: return "eta";
  }
  return "?";
}

std::string_view to_string(EdgeMode mode) {
  switch (mode) {
    case EdgeMode::AsPaper: return "paper";
    case EdgeMode::FullyConnected: return "full";
    case EdgeMode::SequentialChain: return "sequential";
  }
  return "?";
}

GraphMethod parse_method(std::string_view name) {
  for (auto m : {GraphMethod::StationNode, GraphMethod::FeatureNode, GraphMethod::BendingCentric,
                 GraphMethod::EtaCentric}) {
    if (name == to_string(m)) return m;
  }
  throw UsageError("unknown graph method '" + std::string(name) + "' (valid: station, feature, bending, eta)");
}

EdgeMode parse_edge_mode(std::string_view name) {
  for (auto m : {EdgeMode::AsPaper, EdgeMode::FullyConnected, EdgeMode::SequentialChain}) {
    if (name == to_string(m)) return m;
  }
  throw UsageError("unknown edge mode '" + std::string(name) + "' (valid: paper, full, sequential)");
}

void validate_spec(const GraphSpec& spec) {
  if (spec.method != GraphMethod::StationNode && spec.edge_mode != EdgeMode::AsPaper) {
    throw UsageError("edge mode '" + std::string(to_string(spec.edge_mode)) + "' applies only to the station method");
  }
  if (spec.method == GraphMethod::EtaCentric && (spec.knn_k == 0 || spec.knn_k >= num_nodes(spec.method))) {
    throw UsageError("knn_k must be in [1, " + std::to_string(num_nodes(spec.method) - 1) + "]");
  }
}

}  // namespace ptgnn::graph
