#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ptgnn/ad/tensor.hpp"

namespace ptgnn::graph {

enum class GraphMethod { StationNode, FeatureNode, BendingCentric, EtaCentric };

/// Edge topology for the station-as-node method; other methods use their own
/// fixed rule and accept only AsPaper.
enum class EdgeMode { AsPaper, FullyConnected, SequentialChain };

struct GraphSpec {
  GraphMethod method = GraphMethod::StationNode;
  EdgeMode edge_mode = EdgeMode::AsPaper;
  std::size_t knn_k = 3;  // EtaCentric only
};

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct GraphSample {
  GraphMethod method = GraphMethod::StationNode;
  ad::Tensor node_features;  // num_nodes x node_dim
  std::vector<Edge> edges;   // messages flow src -> dst
  ad::Tensor edge_attr;      // num_edges x edge_dim, empty when absent
  double target_pt = 0.0;
  std::vector<std::string> node_names;

  std::size_t num_nodes() const { return node_features.rows(); }
  std::size_t node_dim() const { return node_features.cols(); }
  std::size_t num_edges() const { return edges.size(); }
  bool has_edge_attr() const { return !edge_attr.empty(); }
  std::size_t edge_dim() const { return has_edge_attr() ? edge_attr.cols() : 0; }

  /// Throws std::invalid_argument on any broken invariant (endpoint range,
  /// self-loop, attribute row count, node count).
  void validate() const;
};

std::size_t num_nodes(GraphMethod method);
std::size_t node_dim(GraphMethod method);
std::size_t edge_dim(GraphMethod method);

std::string_view to_string(GraphMethod method);
std::string_view to_string(EdgeMode mode);
/// Accepts station|feature|bending|eta; throws UsageError listing valid names.
GraphMethod parse_method(std::string_view name);
/// Accepts paper|full|sequential.
EdgeMode parse_edge_mode(std::string_view name);

/// Throws UsageError for combinations the builders do not define.
void validate_spec(const GraphSpec& spec);

}  // namespace ptgnn::graph
