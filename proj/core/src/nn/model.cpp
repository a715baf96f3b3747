#include "ptgnn/nn/model.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "ptgnn/ad/ops.hpp"
#include "ptgnn/common/binary_io.hpp"
#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/kv_file.hpp"

namespace ptgnn::nn {

namespace {

constexpr char kMagic[8] = {'P', 'T', 'G', 'N', 'N', 'C', 'K', 'P'};

std::string block_key(std::size_t i, const char* field) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "block.%04zu.%s", i, field);
  return buf;
}

}  // namespace

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  const std::size_t node_dim = config_.node_dim();
  const std::size_t embed = config_.embed_dim;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::size_t in = l == 0 ? node_dim : embed;
    const std::string prefix = "layer" + std::to_string(l);
    switch (config_.backbone) {
      case Backbone::MPL: {
        MplDims dims;
        dims.in = in;
        dims.out = embed;
        dims.edge_in = config_.edge_dim();
        dims.edge_embed = config_.edge_embed_dim;
        dims.edge_hidden = config_.edge_hidden_dim;
        dims.attn = config_.attn_dim;
        mpl_.push_back(MplLayer::create(params_, prefix, dims));
        break;
      }
      case Backbone::EdgeConv:
        edgeconv_.push_back(EdgeConvLayer::create(params_, prefix, in, embed, config_.edgeconv_mlp_layers));
        break;
      case Backbone::GCN:
        gcn_.push_back(GcnLayer::create(params_, prefix, in, embed));
        break;
    }
  }
  std::size_t width = embed;
  const auto head = config_.resolved_head_dims();
  for (std::size_t k = 0; k < head.size(); ++k) {
    head_.push_back(add_linear(params_, "head" + std::to_string(k), width, head[k]));
    width = head[k];
  }
}

ad::Var Model::forward(ad::Tape& tape, std::span<const ad::Var> bound, const graph::GraphSample& graph,
                       std::vector<MplTrace>* traces) const {
  check_graph(config_, graph);
  const ad::Var nodes = tape.input(graph.node_features);
  std::optional<ad::Var> edge_attr;
  if (graph.has_edge_attr()) edge_attr = tape.input(graph.edge_attr);
  return forward(tape, bound, nodes, graph.edges, edge_attr, traces);
}

ad::Var Model::forward(ad::Tape& tape, std::span<const ad::Var> bound, ad::Var nodes,
                       std::span<const graph::Edge> edges, std::optional<ad::Var> edge_attr,
                       std::vector<MplTrace>* traces) const {
  if (bound.size() != params_.size()) throw std::invalid_argument("Model::forward: parameters not bound");
  ad::Var h = nodes;
  for (const auto& layer : mpl_) {
    MplTrace trace;
    h = mpl_forward(tape, layer, bound, h, edges, edge_attr, traces ? &trace : nullptr);
    if (traces) traces->push_back(std::move(trace));
  }
  for (const auto& layer : edgeconv_) h = edgeconv_forward(tape, layer, bound, h, edges);
  for (const auto& layer : gcn_) h = gcn_forward(tape, layer, bound, h, edges);

  ad::Var x = ad::mean_rows(tape, h);
  for (std::size_t k = 0; k < head_.size(); ++k) {
    x = head_[k].apply(tape, bound, x);
    if (k + 1 < head_.size()) x = ad::relu(tape, x);
  }
  return x;
}

double Model::predict(const graph::GraphSample& graph) const {
  ad::Tape tape;
  const auto bound = params_.bind(tape);
  return tape.value(forward(tape, bound, graph)).item();
}

std::size_t param_count(const ModelConfig& config) { return Model(config).params().count(); }

ModelParams init_params(const ModelConfig& config, std::uint64_t seed) {
  ModelParams params = Model(config).params();
  glorot_init(params, seed);
  return params;
}

void check_graph(const ModelConfig& config, const graph::GraphSample& g) {
  const auto method = config.graph_spec.method;
  auto fail = [&](const std::string& what) {
    throw DataError("graph does not match model (" + std::string(graph::to_string(method)) + "): " + what);
  };
  if (g.method != method) fail("built with method " + std::string(graph::to_string(g.method)));
  if (g.num_nodes() == 0) fail("no nodes");
  if (g.node_dim() != config.node_dim()) {
    fail("node dim " + std::to_string(g.node_dim()) + ", expected " + std::to_string(config.node_dim()));
  }
  if (g.edge_dim() != config.edge_dim()) {
    fail("edge dim " + std::to_string(g.edge_dim()) + ", expected " + std::to_string(config.edge_dim()));
  }
  if (g.has_edge_attr() && g.edge_attr.rows() != g.edges.size()) fail("edge attribute rows do not match edges");
}

std::filesystem::path manifest_path_for(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".manifest");
}

void write_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelParams& params,
                      std::uint64_t seed, std::uint64_t epoch) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    LeWriter w(out);
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kCheckpointVersion);
    w.u64(config_digest(config));
    w.u64(seed);
    w.u64(epoch);
    const auto flat = params.flatten();
    w.u64(flat.size());
    for (double v : flat) w.f64(v);
    if (!out) throw DataError("failed writing " + path.string());
  }
  KeyValueDoc manifest;
  write_model_config(manifest, config);
  manifest.set("checkpoint.version", std::to_string(kCheckpointVersion));
  manifest.set("checkpoint.seed", std::to_string(seed));
  manifest.set("checkpoint.epoch", std::to_string(epoch));
  manifest.set("checkpoint.param_count", std::to_string(params.count()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    manifest.set(block_key(i, "name"), params.block(i).name);
    manifest.set(block_key(i, "shape"), ad::shape_to_string(params.block(i).value.shape()));
  }
  manifest.save(manifest_path_for(path));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const auto manifest = KeyValueDoc::load(manifest_path_for(path));
  Checkpoint ckp;
  try {
    ckp.config = read_model_config(manifest);
  } catch (const UsageError& e) {
    throw DataError(manifest_path_for(path).string() + ": " + e.what());
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  LeReader r(in, path.string());
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw DataError(path.string() + ": not a checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw DataError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  if (r.u64() != config_digest(ckp.config)) {
    throw DataError(path.string() + ": config digest does not match its manifest");
  }
  ckp.seed = r.u64();
  ckp.epoch = r.u64();
  const std::uint64_t count = r.u64();
  std::vector<double> flat(count);
  for (double& v : flat) v = r.f64();

  ckp.params = Model(ckp.config).params();
  if (count != ckp.params.count()) {
    throw DataError(path.string() + ": holds " + std::to_string(count) + " parameters, config needs " +
                    std::to_string(ckp.params.count()));
  }
  ckp.params.assign(flat);
  return ckp;
}

}  // namespace ptgnn::nn
