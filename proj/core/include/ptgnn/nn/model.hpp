#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ptgnn/ad/tape.hpp"
#include "ptgnn/graph/graph.hpp"
#include "ptgnn/nn/config.hpp"
#include "ptgnn/nn/layers.hpp"
#include "ptgnn/nn/params.hpp"

namespace ptgnn::nn {

/// Backbone stack, mean pooling and regression head over a parameter registry.
class Model {
 public:
  /// Builds the layer structure with zeroed parameters.
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  ModelParams& params() { return params_; }
  const ModelParams& params() const { return params_; }

  /// Records the forward pass; returns a [1 x 1] prediction. `bound` comes
  /// from params().bind(tape). MPL traces are appended per layer when given.
  ad::Var forward(ad::Tape& tape, std::span<const ad::Var> bound, const graph::GraphSample& graph,
                  std::vector<MplTrace>* traces = nullptr) const;
  /// Same, with node features supplied as a tape variable (for input gradients).
  ad::Var forward(ad::Tape& tape, std::span<const ad::Var> bound, ad::Var nodes, std::span<const graph::Edge> edges,
                  std::optional<ad::Var> edge_attr, std::vector<MplTrace>* traces = nullptr) const;

  double predict(const graph::GraphSample& graph) const;

 private:
  ModelConfig config_;
  ModelParams params_;
  std::vector<MplLayer> mpl_;
  std::vector<EdgeConvLayer> edgeconv_;
  std::vector<GcnLayer> gcn_;
  std::vector<Linear> head_;
};

std::size_t param_count(const ModelConfig& config);
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

/// Throws DataError when the graph does not fit the configured method.
void check_graph(const ModelConfig& config, const graph::GraphSample& graph);

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig config;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  ModelParams params;
};

/// Writes <path> (binary) and <path>.manifest (text: config, block names and shapes).
void write_checkpoint(const std::filesystem::path& path, const ModelConfig& config, const ModelParams& params,
                      std::uint64_t seed, std::uint64_t epoch);
/// Reads both files; throws DataError on a malformed file or a config digest mismatch.
Checkpoint read_checkpoint(const std::filesystem::path& path);

std::filesystem::path manifest_path_for(const std::filesystem::path& checkpoint);

}  // namespace ptgnn::nn
