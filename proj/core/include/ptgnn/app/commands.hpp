#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ptgnn/app/gradcheck_suite.hpp"
#include "ptgnn/app/run_config.hpp"
#include "ptgnn/train/trainer.hpp"

// Batch commands behind the ptgnn tool. Each throws UsageError, DataError or
// NumericalError; the tool maps them to exit codes 1, 2 and 3. Progress goes
// to `log`.

namespace ptgnn::app {

struct SynthOptions {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::filesystem::path out;
};

/// Writes the CSV and <out>.provenance.
void cmd_synth(const SynthOptions& options, std::ostream& log);

struct BuildGraphsOptions {
  std::filesystem::path in;
  std::filesystem::path schema;
  std::string method = "station";
  std::string edge_mode = "paper";
  std::size_t knn_k = 3;
  std::string iqr = "auto";
  double train_fraction = 0.8;
  std::uint64_t seed = 1;  // split used to fit the standardizers
  std::filesystem::path out;
};

/// Builds graphs for every kept event in input order (train and test alike)
/// and writes the dump, its .idx and a .stats sidecar.
std::size_t cmd_build_graphs(const BuildGraphsOptions& options, std::ostream& log);

struct TrainOptions {
  std::filesystem::path config;
  std::filesystem::path data;  // overrides data.path when set
  std::vector<std::uint64_t> seeds;  // empty: train.seed
  std::filesystem::path out_dir;
  std::size_t jobs = 1;
  std::vector<std::string> overrides;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  double val_loss = 0.0;
  double val_mae = 0.0;
  std::size_t train_events = 0;
  std::size_t val_events = 0;
};

struct TrainSummary {
  std::vector<SeedRun> runs;  // in seed order
  std::size_t median_run = 0;  // index into runs
  double mae_std = 0.0;        // sample std across seeds; 0 for one seed
  std::size_t param_count = 0;
};

/// One fit per seed; writes summary.csv, epoch_log_seed<k>.csv,
/// model_seed<k>.ckpt (+ .manifest, .stats) and config.resolved.
TrainSummary cmd_train(const TrainOptions& options, std::ostream& log);

/// Median run: the middle MAE after sorting (the lower middle for an even count).
std::size_t median_index(const std::vector<double>& maes);

struct EvalOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path data;    // event CSV or graph dump
  std::filesystem::path schema;  // for foreign CSV layouts
  std::string subset = "all";    // all|train|test, CSV input only
  std::filesystem::path out;     // directory
};

/// Writes metrics.csv, residuals.csv and config.resolved under options.out.
train::EvalResult cmd_eval(const EvalOptions& options, std::ostream& log);

struct GradCheckOptions {
  std::filesystem::path config;
  std::uint64_t seed = 1;
  std::vector<std::string> overrides;
  std::optional<std::string> corrupt_adjoint;  // test hook: op name
  std::filesystem::path out;                   // optional report file
};

GradCheckReport cmd_gradcheck(const GradCheckOptions& options, std::ostream& log);

}  // namespace ptgnn::app
