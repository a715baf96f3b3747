#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ptgnn/graph/graph.hpp"

namespace ptgnn::graph {

// Binary graph dump, all integers and floats little-endian:
//   file header : "PTGNNGRF" | u32 version | u64 record count
//   record      : u32 method tag | u32 num_nodes | u32 node_dim | u32 num_edges
//                 | u32 edge_dim | f64 target_pt | f64[num_nodes * node_dim]
//                 | u32[2 * num_edges] (src, dst pairs) | f64[num_edges * edge_dim]
// The text index lists one line per record with its byte offset.

inline constexpr std::uint32_t kGraphDumpVersion = 1;

/// Writes `path` and `path` + ".idx". Extra provenance lines go into the
/// index file as '#' comments.
void write_graph_dump(const std::filesystem::path& path, std::span<const GraphSample> graphs,
                      const std::map<std::string, std::string>& provenance = {});

std::vector<GraphSample> read_graph_dump(const std::filesystem::path& path);

std::filesystem::path index_path_for(const std::filesystem::path& dump_path);

}  // namespace ptgnn::graph
