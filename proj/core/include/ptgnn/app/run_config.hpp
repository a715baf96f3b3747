#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/nn/config.hpp"
#include "ptgnn/train/trainer.hpp"

namespace ptgnn::app {

inline constexpr std::string_view kVersion = "0.1.0";

enum class IqrMode { Auto, On, Off };

std::string_view to_string(IqrMode mode);
IqrMode parse_iqr_mode(std::string_view name);

struct DataConfig {
  std::filesystem::path path;    // event CSV; relative paths resolve against the config file
  std::filesystem::path schema;  // optional column mapping for foreign CSV layouts
  IqrMode iqr = IqrMode::Auto;   // auto: on for the bending and eta methods
  double train_fraction = 0.8;

  /// Whether the target outlier filter runs for the given graph method.
  bool iqr_enabled(graph::GraphMethod method) const;
};

/// Everything a run needs, serialized as flat dotted keys.
struct RunConfig {
  DataConfig data;
  nn::ModelConfig model;
  train::TrainConfig train;
};

KeyValueDoc to_doc(const RunConfig& config);
/// Throws UsageError for unknown keys or invalid values.
RunConfig run_config_from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir = {});

/// Applies "key=value" overrides; keys must be known config keys.
void apply_overrides(KeyValueDoc& doc, std::span<const std::string> overrides);

/// Loads a config file (or defaults when `path` is empty) and applies overrides.
RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

}  // namespace ptgnn::app
