#include "ptgnn/graph/dump.hpp"

#include <cstring>
#include <fstream>

#include "ptgnn/common/binary_io.hpp"
#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/kv_file.hpp"

namespace ptgnn::graph {

namespace {

constexpr char kMagic[8] = {'P', 'T', 'G', 'N', 'N', 'G', 'R', 'F'};

std::uint32_t method_tag(GraphMethod m) { return static_cast<std::uint32_t>(m) + 1; }

GraphMethod method_from_tag(std::uint32_t tag, const std::string& origin) {
  if (tag < 1 || tag > 4) throw DataError(origin + ": unknown method tag " + std::to_string(tag));
  return static_cast<GraphMethod>(tag - 1);
}

}  // namespace

std::filesystem::path index_path_for(const std::filesystem::path& dump_path) {
  return std::filesystem::path(dump_path.string() + ".idx");
}

void write_graph_dump(const std::filesystem::path& path, std::span<const GraphSample> graphs,
                      const std::map<std::string, std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  std::ofstream idx(index_path_for(path));
  if (!idx) throw DataError("cannot write " + index_path_for(path).string());

  idx << "# ptgnn graph index v" << kGraphDumpVersion << '\n';
  for (const auto& [k, v] : provenance) idx << "# " << k << " = " << v << '\n';
  idx << "record,offset,method,num_nodes,node_dim,num_edges,edge_dim,target_pt\n";

  LeWriter w(out);
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kGraphDumpVersion);
  w.u64(graphs.size());
  for (std::size_t r = 0; r < graphs.size(); ++r) {
    const auto& g = graphs[r];
    idx << r << ',' << static_cast<std::uint64_t>(out.tellp()) << ',' << to_string(g.method) << ',' << g.num_nodes()
        << ',' << g.node_dim() << ',' << g.num_edges() << ',' << g.edge_dim() << ',' << format_double(g.target_pt)
        << '\n';
    w.u32(method_tag(g.method));
    w.u32(static_cast<std::uint32_t>(g.num_nodes()));
    w.u32(static_cast<std::uint32_t>(g.node_dim()));
    w.u32(static_cast<std::uint32_t>(g.num_edges()));
    w.u32(static_cast<std::uint32_t>(g.edge_dim()));
    w.f64(g.target_pt);
    for (double v : g.node_features.values()) w.f64(v);
    for (const auto& e : g.edges) {
      w.u32(static_cast<std::uint32_t>(e.src));
      w.u32(static_cast<std::uint32_t>(e.dst));
    }
    for (double v : g.edge_attr.values()) w.f64(v);
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<GraphSample> read_graph_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  LeReader r(in, path.string());
  char magic[8];
  r.bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw DataError(path.string() + ": not a graph dump");
  const std::uint32_t version = r.u32();
  if (version != kGraphDumpVersion) {
    throw DataError(path.string() + ": unsupported graph dump version " + std::to_string(version));
  }
  const std::uint64_t count = r.u64();
  std::vector<GraphSample> graphs;
  graphs.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    GraphSample g;
    g.method = method_from_tag(r.u32(), path.string());
    const std::size_t n = r.u32();
    const std::size_t f = r.u32();
    const std::size_t ne = r.u32();
    const std::size_t de = r.u32();
    g.target_pt = r.f64();
    g.node_features = ad::Tensor({n, f});
    for (double& v : g.node_features.values()) v = r.f64();
    g.edges.resize(ne);
    for (auto& e : g.edges) {
      e.src = r.u32();
      e.dst = r.u32();
    }
    if (de > 0) {
      g.edge_attr = ad::Tensor({ne, de});
      for (double& v : g.edge_attr.values()) v = r.f64();
    }
    graphs.push_back(std::move(g));
  }
  return graphs;
}

}  // namespace ptgnn::graph
