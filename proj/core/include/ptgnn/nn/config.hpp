#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/graph/graph.hpp"
#include "ptgnn/loss/losses.hpp"

namespace ptgnn::nn {

enum class Backbone { MPL, EdgeConv, GCN };

std::string_view to_string(Backbone b);
/// Accepts mpl|edgeconv|gcn.
Backbone parse_backbone(std::string_view name);

struct ModelConfig {
  Backbone backbone = Backbone::MPL;
  std::size_t num_layers = 4;
  std::size_t embed_dim = 16;
  /// Regression head widths ending in 1; empty means {embed_dim / 2, 1}.
  std::vector<std::size_t> head_dims;
  graph::GraphSpec graph_spec;
  loss::LossConfig loss;

  // MPL widths. Zero selects the default noted on each field.
  std::size_t edge_embed_dim = 8;   // width of the encoded edge attribute
  std::size_t edge_hidden_dim = 0;  // 0: 2 * raw edge dim
  std::size_t attn_dim = 0;         // 0: layer output width

  /// Affine+ReLU stages in each EdgeConv MLP; the first maps 2 F_in -> F_out,
  /// the rest F_out -> F_out.
  std::size_t edgeconv_mlp_layers = 2;

  std::size_t node_dim() const { return graph::node_dim(graph_spec.method); }
  std::size_t edge_dim() const { return graph::edge_dim(graph_spec.method); }
  std::vector<std::size_t> resolved_head_dims() const;

  /// Throws UsageError on an inconsistent configuration.
  void validate() const;
};

void write_model_config(KeyValueDoc& doc, const ModelConfig& config);
/// Reads model.*, graph.* and loss.* keys; missing keys keep defaults.
ModelConfig read_model_config(const KeyValueDoc& doc);

/// FNV-1a over the canonical key-value text of the config.
std::uint64_t config_digest(const ModelConfig& config);

}  // namespace ptgnn::nn
