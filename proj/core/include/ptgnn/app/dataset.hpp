#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "ptgnn/app/run_config.hpp"
#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/data/event.hpp"
#include "ptgnn/data/preprocess.hpp"
#include "ptgnn/graph/builders.hpp"
#include "ptgnn/graph/graph.hpp"

namespace ptgnn::app {

inline constexpr int kStatsVersion = 1;

/// Loads the configured CSV, through the schema mapping when one is set.
data::EventTable load_events(const DataConfig& config);

/// Preprocessing state fitted on the training split, enough to rebuild graphs
/// for any event.
struct PreprocessState {
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  bool iqr_applied = false;
  data::IqrResult iqr;  // bounds only; kept indices are not stored
  data::FeatureStats full;
  data::FeatureStats compact;
  graph::EtaGraphStats eta;
  graph::GraphSpec spec;
  std::size_t theta_clamps = 0;
};

KeyValueDoc to_doc(const PreprocessState& state);
PreprocessState preprocess_state_from_doc(const KeyValueDoc& doc);

struct PreparedDataset {
  PreprocessState state;
  std::size_t input_rows = 0;
  std::size_t iqr_removed = 0;
  /// Indices into the post-filter event list.
  data::Split split;
  std::vector<graph::GraphSample> train;
  std::vector<graph::GraphSample> test;
};

/// Engineer, optionally IQR-filter, split with the Split stream of `seed`,
/// fit standardizers on the training rows, and build graphs for both splits.
PreparedDataset prepare_dataset(const data::EventTable& table, const RunConfig& config, std::uint64_t seed);

enum class Subset { All, Train, Test };
Subset parse_subset(std::string_view name);

/// Rebuilds graphs for `table` with a stored preprocessing state. Train/Test
/// subsets replay the stored split and assume the same input rows.
std::vector<graph::GraphSample> graphs_from_state(const data::EventTable& table, const PreprocessState& state,
                                                  Subset subset);

}  // namespace ptgnn::app
