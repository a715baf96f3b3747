#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ptgnn/ad/tape.hpp"
#include "ptgnn/graph/graph.hpp"
#include "ptgnn/nn/params.hpp"

namespace ptgnn::nn {

struct MplDims {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t edge_in = 0;        // raw edge attribute width; 0 when graphs carry none
  std::size_t edge_embed = 8;     // width of the encoded edge attribute
  std::size_t edge_hidden = 0;    // 0: 2 * edge_in
  std::size_t attn = 0;           // 0: out
};

/// Gated attention message-passing layer.
struct MplLayer {
  MplDims dims;
  std::optional<Linear> edge_enc1;  // edge_in -> edge_hidden
  std::optional<Linear> edge_enc2;  // edge_hidden -> edge_embed
  Linear message;                   // 2 in + edge_embed -> out
  Linear self;                      // in -> out
  Linear gate_msg;                  // 2 out -> out, weights aggregated messages
  Linear gate_self;                 // 2 out -> out, weights the self term
  Linear attn_node;                 // in -> attn
  Linear attn_msg;                  // out -> attn
  Linear attn_score;                // attn -> 1

  static MplLayer create(ModelParams& params, const std::string& prefix, MplDims dims);
};

/// Max-aggregated edge convolution; the edge MLP has Linear-ReLU stages with a
/// linear final map.
struct EdgeConvLayer {
  std::vector<Linear> mlp;

  static EdgeConvLayer create(ModelParams& params, const std::string& prefix, std::size_t in, std::size_t out,
                              std::size_t mlp_layers);
};

/// relu(A_hat X W + b) with A_hat = D^-1/2 (A + I) D^-1/2.
struct GcnLayer {
  Linear lin;

  static GcnLayer create(ModelParams& params, const std::string& prefix, std::size_t in, std::size_t out);
};

/// Intermediate MPL quantities, filled when a trace is requested.
struct MplTrace {
  ad::Tensor attention;      // E x 1
  ad::Tensor raw_messages;   // E x out
  ad::Tensor aggregated;     // N x out
  ad::Tensor gate_msg;       // N x out
  ad::Tensor gate_self;      // N x out
  ad::Tensor self_term;      // N x out
};

/// Edge-list validation shared by all layers; throws std::invalid_argument.
void check_edges(std::span<const graph::Edge> edges, std::size_t num_nodes);

ad::Var mpl_forward(ad::Tape& tape, const MplLayer& layer, std::span<const ad::Var> bound, ad::Var nodes,
                    std::span<const graph::Edge> edges, std::optional<ad::Var> edge_attr, MplTrace* trace = nullptr);

ad::Var edgeconv_forward(ad::Tape& tape, const EdgeConvLayer& layer, std::span<const ad::Var> bound, ad::Var nodes,
                         std::span<const graph::Edge> edges);

/// Normalized adjacency with self loops; A[dst][src] = 1 for each listed edge.
ad::Tensor gcn_normalized_adjacency(std::size_t num_nodes, std::span<const graph::Edge> edges);

ad::Var gcn_forward(ad::Tape& tape, const GcnLayer& layer, std::span<const ad::Var> bound, ad::Var nodes,
                    std::span<const graph::Edge> edges);

}  // namespace ptgnn::nn
