#include "ptgnn/nn/layers.hpp"

#include <cmath>
#include <stdexcept>

#include "ptgnn/ad/ops.hpp"

namespace ptgnn::nn {

namespace {

void check_width(const ad::Tape& tape, ad::Var x, std::size_t expected, const char* what) {
  const auto& v = tape.value(x);
  if (v.cols() != expected) {
    throw std::invalid_argument(std::string(what) + ": expected width " + std::to_string(expected) + ", got " +
                                std::to_string(v.cols()));
  }
}

struct EdgeIndex {
  std::vector<std::size_t> src;
  std::vector<std::size_t> dst;
};

EdgeIndex split_edges(std::span<const graph::Edge> edges) {
  EdgeIndex idx;
  idx.src.reserve(edges.size());
  idx.dst.reserve(edges.size());
  for (const auto& e : edges) {
    idx.src.push_back(e.src);
    idx.dst.push_back(e.dst);
  }
  return idx;
}

}  // namespace

void check_edges(std::span<const graph::Edge> edges, std::size_t num_nodes) {
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (edges[k].src >= num_nodes || edges[k].dst >= num_nodes) {
      throw std::invalid_argument("edge " + std::to_string(k) + " (" + std::to_string(edges[k].src) + "->" +
                                  std::to_string(edges[k].dst) + ") out of range for " + std::to_string(num_nodes) +
                                  " nodes");
    }
  }
}

MplLayer MplLayer::create(ModelParams& params, const std::string& prefix, MplDims dims) {
  if (dims.edge_hidden == 0) dims.edge_hidden = 2 * dims.edge_in;
  if (dims.attn == 0) dims.attn = dims.out;
  MplLayer l;
  l.dims = dims;
  if (dims.edge_in > 0) {
    l.edge_enc1 = add_linear(params, prefix + ".edge_enc1", dims.edge_in, dims.edge_hidden);
    l.edge_enc2 = add_linear(params, prefix + ".edge_enc2", dims.edge_hidden, dims.edge_embed);
  }
  l.message = add_linear(params, prefix + ".message", 2 * dims.in + dims.edge_embed, dims.out);
  l.self = add_linear(params, prefix + ".self", dims.in, dims.out);
  l.gate_msg = add_linear(params, prefix + ".gate_msg", 2 * dims.out, dims.out);
  l.gate_self = add_linear(params, prefix + ".gate_self", 2 * dims.out, dims.out);
  l.attn_node = add_linear(params, prefix + ".attn_node", dims.in, dims.attn);
  l.attn_msg = add_linear(params, prefix + ".attn_msg", dims.out, dims.attn);
  l.attn_score = add_linear(params, prefix + ".attn_score", dims.attn, 1);
  return l;
}

ad::Var mpl_forward(ad::Tape& tape, const MplLayer& layer, std::span<const ad::Var> bound, ad::Var nodes,
                    std::span<const graph::Edge> edges, std::optional<ad::Var> edge_attr, MplTrace* trace) {
  const auto& d = layer.dims;
  check_width(tape, nodes, d.in, "mpl_forward nodes");
  const std::size_t n = tape.value(nodes).rows();
  check_edges(edges, n);
  if (edge_attr) {
    if (!layer.edge_enc1) throw std::invalid_argument("mpl_forward: layer has no edge encoder for edge attributes");
    check_width(tape, *edge_attr, d.edge_in, "mpl_forward edge_attr");
    if (tape.value(*edge_attr).rows() != edges.size()) {
      throw std::invalid_argument("mpl_forward: edge_attr rows do not match edge count");
    }
  } else if (layer.edge_enc1) {
    throw std::invalid_argument("mpl_forward: layer expects edge attributes");
  }

  const ad::Var self_term = ad::relu(tape, layer.self.apply(tape, bound, nodes));

  ad::Var aggregated;
  if (edges.empty()) {
    aggregated = tape.constant(ad::Tensor::zeros(n, d.out));
    if (trace) {
      trace->attention = ad::Tensor::zeros(0, 1);
      trace->raw_messages = ad::Tensor::zeros(0, d.out);
    }
  } else {
    const EdgeIndex idx = split_edges(edges);
    const std::size_t e = edges.size();
    const ad::Var h_i = ad::gather_rows(tape, nodes, idx.dst);
    const ad::Var h_j = ad::gather_rows(tape, nodes, idx.src);
    const ad::Var diff = ad::sub(tape, h_j, h_i);

    ad::Var e_enc;
    if (edge_attr) {
      const ad::Var hidden = ad::relu(tape, layer.edge_enc1->apply(tape, bound, *edge_attr));
      e_enc = ad::relu(tape, layer.edge_enc2->apply(tape, bound, hidden));
    } else {
      e_enc = tape.constant(ad::Tensor::zeros(e, d.edge_embed));
    }

    const ad::Var parts[] = {h_i, diff, e_enc};
    const ad::Var z = ad::concat(tape, parts, 1);
    const ad::Var msg = ad::relu(tape, layer.message.apply(tape, bound, z));

    const ad::Var a1 = ad::tanh(tape, layer.attn_node.apply(tape, bound, h_i));
    const ad::Var a2 = ad::tanh(tape, layer.attn_msg.apply(tape, bound, msg));
    const ad::Var score = layer.attn_score.apply(tape, bound, ad::mul(tape, a1, a2));
    const ad::Var alpha = ad::segment_softmax(tape, score, idx.dst, n);

    // Broadcast alpha across the message width with an outer product.
    const ad::Var ones = tape.constant(ad::Tensor({1, d.out}, 1.0));
    const ad::Var weighted = ad::mul(tape, ad::matmul(tape, alpha, ones), msg);
    aggregated = ad::segment_sum(tape, weighted, idx.dst, n);
    if (trace) {
      trace->attention = tape.value(alpha);
      trace->raw_messages = tape.value(msg);
    }
  }

  const ad::Var gate_parts[] = {self_term, aggregated};
  const ad::Var gate_in = ad::concat(tape, gate_parts, 1);
  const ad::Var w1 = ad::sigmoid(tape, layer.gate_msg.apply(tape, bound, gate_in));
  const ad::Var w2 = ad::sigmoid(tape, layer.gate_self.apply(tape, bound, gate_in));
  const ad::Var out = ad::add(tape, ad::mul(tape, w1, aggregated), ad::mul(tape, w2, self_term));
  if (trace) {
    trace->aggregated = tape.value(aggregated);
    trace->gate_msg = tape.value(w1);
    trace->gate_self = tape.value(w2);
    trace->self_term = tape.value(self_term);
  }
  return out;
}

EdgeConvLayer EdgeConvLayer::create(ModelParams& params, const std::string& prefix, std::size_t in, std::size_t out,
                                    std::size_t mlp_layers) {
  if (mlp_layers == 0) throw std::invalid_argument("EdgeConv MLP needs at least one layer");
  EdgeConvLayer l;
  for (std::size_t k = 0; k < mlp_layers; ++k) {
    l.mlp.push_back(add_linear(params, prefix + ".mlp" + std::to_string(k), k == 0 ? 2 * in : out, out));
  }
  return l;
}

ad::Var edgeconv_forward(ad::Tape& tape, const EdgeConvLayer& layer, std::span<const ad::Var> bound, ad::Var nodes,
                         std::span<const graph::Edge> edges) {
  check_width(tape, nodes, layer.mlp.front().in / 2, "edgeconv_forward nodes");
  const std::size_t n = tape.value(nodes).rows();
  check_edges(edges, n);

  // Isolated nodes aggregate over a virtual self edge, i.e. MLP([h_i | 0]).
  EdgeIndex idx = split_edges(edges);
  std::vector<bool> has_incoming(n, false);
  for (auto dst : idx.dst) has_incoming[dst] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!has_incoming[i]) {
      idx.src.push_back(i);
      idx.dst.push_back(i);
    }
  }

  const ad::Var h_i = ad::gather_rows(tape, nodes, idx.dst);
  const ad::Var h_j = ad::gather_rows(tape, nodes, idx.src);
  const ad::Var parts[] = {h_i, ad::sub(tape, h_j, h_i)};
  ad::Var x = ad::concat(tape, parts, 1);
  for (std::size_t k = 0; k < layer.mlp.size(); ++k) {
    x = layer.mlp[k].apply(tape, bound, x);
    if (k + 1 < layer.mlp.size()) x = ad::relu(tape, x);
  }
  return ad::segment_max(tape, x, idx.dst, n);
}

GcnLayer GcnLayer::create(ModelParams& params, const std::string& prefix, std::size_t in, std::size_t out) {
  return GcnLayer{add_linear(params, prefix + ".linear", in, out)};
}

ad::Tensor gcn_normalized_adjacency(std::size_t num_nodes, std::span<const graph::Edge> edges) {
  check_edges(edges, num_nodes);
  ad::Tensor a = ad::Tensor::identity(num_nodes);
  for (const auto& e : edges) a(e.dst, e.src) = 1.0;
  std::vector<double> inv_sqrt_deg(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < num_nodes; ++j) deg += a(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < num_nodes; ++i) {
    for (std::size_t j = 0; j < num_nodes; ++j) a(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  return a;
}

ad::Var gcn_forward(ad::Tape& tape, const GcnLayer& layer, std::span<const ad::Var> bound, ad::Var nodes,
                    std::span<const graph::Edge> edges) {
  check_width(tape, nodes, layer.lin.in, "gcn_forward nodes");
  const std::size_t n = tape.value(nodes).rows();
  const ad::Var adj = tape.constant(gcn_normalized_adjacency(n, edges));
  const ad::Var propagated = ad::matmul(tape, adj, nodes);
  return ad::relu(tape, layer.lin.apply(tape, bound, propagated));
}

}  // namespace ptgnn::nn
