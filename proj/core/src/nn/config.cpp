#include "ptgnn/nn/config.hpp"

#include "ptgnn/common/errors.hpp"

namespace ptgnn::nn {

std::string_view to_string(Backbone b) {
  switch (b) {
    case Backbone::MPL: return "mpl";
    case Backbone::EdgeConv: return "edgeconv";
    case Backbone::GCN: return "gcn";
  }
  return "?";
}

Backbone parse_backbone(std::string_view name) {
  for (auto b : {Backbone::MPL, Backbone::EdgeConv, Backbone::GCN}) {
    if (name == to_string(b)) return b;
  }
  throw UsageError("unknown backbone '" + std::string(name) + "' (valid: mpl, edgeconv, gcn)");
}

std::vector<std::size_t> ModelConfig::resolved_head_dims() const {
  if (!head_dims.empty()) return head_dims;
  return {std::max<std::size_t>(embed_dim / 2, 1), 1};
}

void ModelConfig::validate() const {
  if (num_layers < 1) throw UsageError("model.num_layers must be >= 1");
  if (embed_dim < 1) throw UsageError("model.embed_dim must be >= 1");
  const auto head = resolved_head_dims();
  if (head.back() != 1) throw UsageError("model.head_dims must end in 1");
  for (auto d : head) {
    if (d == 0) throw UsageError("model.head_dims entries must be positive");
  }
  if (backbone == Backbone::MPL && edge_embed_dim == 0) throw UsageError("model.edge_embed_dim must be >= 1");
  if (backbone == Backbone::EdgeConv && edgeconv_mlp_layers == 0) {
    throw UsageError("model.edgeconv_mlp_layers must be >= 1");
  }
  graph::validate_spec(graph_spec);
  loss.validate();
}

namespace {

std::string join_dims(const std::vector<std::size_t>& dims) {
  std::string s;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(dims[i]);
  }
  return s;
}

}  // namespace

void write_model_config(KeyValueDoc& doc, const ModelConfig& c) {
  doc.set("model.backbone", std::string(to_string(c.backbone)));
  doc.set("model.num_layers", std::to_string(c.num_layers));
  doc.set("model.embed_dim", std::to_string(c.embed_dim));
  doc.set("model.head_dims", join_dims(c.resolved_head_dims()));
  doc.set("model.edge_embed_dim", std::to_string(c.edge_embed_dim));
  doc.set("model.edge_hidden_dim", std::to_string(c.edge_hidden_dim));
  doc.set("model.attn_dim", std::to_string(c.attn_dim));
  doc.set("model.edgeconv_mlp_layers", std::to_string(c.edgeconv_mlp_layers));
  doc.set("graph.method", std::string(graph::to_string(c.graph_spec.method)));
  doc.set("graph.edge_mode", std::string(graph::to_string(c.graph_spec.edge_mode)));
  doc.set("graph.knn_k", std::to_string(c.graph_spec.knn_k));
  loss::write_loss_config(doc, c.loss);
}

ModelConfig read_model_config(const KeyValueDoc& doc) {
  ModelConfig c;
  auto size = [&](const char* key, std::size_t& out) {
    if (!doc.contains(key)) return;
    const long long v = doc.get_int(key);
    if (v < 0) throw UsageError(std::string(key) + " must be non-negative");
    out = static_cast<std::size_t>(v);
  };
  if (doc.contains("model.backbone")) c.backbone = parse_backbone(doc.get("model.backbone"));
  size("model.num_layers", c.num_layers);
  size("model.embed_dim", c.embed_dim);
  if (doc.contains("model.head_dims")) {
    c.head_dims.clear();
    for (const auto& item : split(doc.get("model.head_dims"), ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      c.head_dims.push_back(static_cast<std::size_t>(std::stoul(t)));
    }
  }
  size("model.edge_embed_dim", c.edge_embed_dim);
  size("model.edge_hidden_dim", c.edge_hidden_dim);
  size("model.attn_dim", c.attn_dim);
  size("model.edgeconv_mlp_layers", c.edgeconv_mlp_layers);
  if (doc.contains("graph.method")) c.graph_spec.method = graph::parse_method(doc.get("graph.method"));
  if (doc.contains("graph.edge_mode")) c.graph_spec.edge_mode = graph::parse_edge_mode(doc.get("graph.edge_mode"));
  size("graph.knn_k", c.graph_spec.knn_k);
  c.loss = loss::read_loss_config(doc);
  c.validate();
  return c;
}

std::uint64_t config_digest(const ModelConfig& config) {
  KeyValueDoc doc;
  write_model_config(doc, config);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : doc.to_string()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace ptgnn::nn
