#include "ptgnn/app/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

#include "ptgnn/app/dataset.hpp"
#include "ptgnn/common/errors.hpp"
#include "ptgnn/data/csv.hpp"
#include "ptgnn/data/synth.hpp"
#include "ptgnn/graph/dump.hpp"
#include "ptgnn/nn/model.hpp"

namespace ptgnn::app {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw UsageError("output directory not set");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void stamp(KeyValueDoc& doc, const std::string& command) {
  doc.set("tool.version", std::string(kVersion));
  doc.set("tool.command", command);
}

fs::path checkpoint_path(const fs::path& dir, std::uint64_t seed) {
  return dir / ("model_seed" + std::to_string(seed) + ".ckpt");
}

fs::path stats_path_for(const fs::path& checkpoint) { return fs::path(checkpoint.string() + ".stats"); }

bool is_graph_dump(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  return in.gcount() == sizeof(magic) && std::memcmp(magic, "PTGNNGRF", sizeof(magic)) == 0;
}

/// Restores the adjoint test hook when a gradcheck run ends.
struct CorruptionGuard {
  explicit CorruptionGuard(std::optional<ad::OpKind> kind) { ad::testing::corrupt_adjoint(kind); }
  ~CorruptionGuard() { ad::testing::corrupt_adjoint(std::nullopt); }
  CorruptionGuard(const CorruptionGuard&) = delete;
  CorruptionGuard& operator=(const CorruptionGuard&) = delete;
};

}  // namespace

void cmd_synth(const SynthOptions& options, std::ostream& log) {
  if (options.n == 0) throw UsageError("--n must be >= 1");
  if (options.out.empty()) throw UsageError("--out is required");
  const auto table = data::synth_generate(options.n, options.seed);
  data::write_csv(options.out, table);

  KeyValueDoc prov;
  stamp(prov, "synth");
  for (const auto& [k, v] : table.metadata) prov.set(k, v);
  prov.save(fs::path(options.out.string() + ".provenance"));
  log << "wrote " << options.n << " events to " << options.out.string() << '\n';
}

std::size_t cmd_build_graphs(const BuildGraphsOptions& options, std::ostream& log) {
  if (options.out.empty()) throw UsageError("--out is required");
  RunConfig cfg;
  cfg.data.path = options.in;
  cfg.data.schema = options.schema;
  cfg.data.iqr = parse_iqr_mode(options.iqr);
  cfg.data.train_fraction = options.train_fraction;
  cfg.model.graph_spec.method = graph::parse_method(options.method);
  cfg.model.graph_spec.edge_mode = graph::parse_edge_mode(options.edge_mode);
  cfg.model.graph_spec.knn_k = options.knn_k;
  graph::validate_spec(cfg.model.graph_spec);

  const auto table = load_events(cfg.data);
  const auto prepared = prepare_dataset(table, cfg, options.seed);
  // Every kept event, restored to input order.
  std::vector<graph::GraphSample> graphs(prepared.train.size() + prepared.test.size());
  for (std::size_t i = 0; i < prepared.split.train.size(); ++i) graphs[prepared.split.train[i]] = prepared.train[i];
  for (std::size_t i = 0; i < prepared.split.test.size(); ++i) graphs[prepared.split.test[i]] = prepared.test[i];

  std::map<std::string, std::string> provenance = {
      {"tool.version", std::string(kVersion)},
      {"input", options.in.string()},
      {"seed", std::to_string(options.seed)},
      {"graph.method", options.method},
      {"graph.edge_mode", options.edge_mode},
      {"graph.knn_k", std::to_string(options.knn_k)},
      {"input_rows", std::to_string(prepared.input_rows)},
      {"dropped_rows", std::to_string(table.dropped)},
      {"iqr_removed", std::to_string(prepared.iqr_removed)},
  };
  graph::write_graph_dump(options.out, graphs, provenance);
  auto stats = to_doc(prepared.state);
  stamp(stats, "build-graphs");
  stats.save(fs::path(options.out.string() + ".stats"));
  log << "wrote " << graphs.size() << ' ' << options.method << " graphs to " << options.out.string() << '\n';
  return graphs.size();
}

std::size_t median_index(const std::vector<double>& maes) {
  if (maes.empty()) throw std::invalid_argument("median_index: no runs");
  std::vector<std::size_t> order(maes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return maes[a] < maes[b]; });
  return order[(maes.size() - 1) / 2];
}

TrainSummary cmd_train(const TrainOptions& options, std::ostream& log) {
  RunConfig cfg = load_run_config(options.config, options.overrides);
  if (!options.data.empty()) cfg.data.path = options.data;
  const std::vector<std::uint64_t> seeds = options.seeds.empty() ? std::vector{cfg.train.seed} : options.seeds;
  if (options.jobs == 0) throw UsageError("--jobs must be >= 1");
  ensure_dir(options.out_dir);

  const auto table = load_events(cfg.data);
  log << "loaded " << table.rows.size() << " events (" << table.dropped << " dropped) from "
      << cfg.data.path.string() << '\n';

  TrainSummary summary;
  summary.param_count = nn::param_count(cfg.model);
  {
    auto resolved = to_doc(cfg);
    stamp(resolved, "train");
    std::string seed_list;
    for (auto s : seeds) seed_list += (seed_list.empty() ? "" : ",") + std::to_string(s);
    resolved.set("run.seeds", seed_list);
    resolved.set("run.param_count", std::to_string(summary.param_count));
    resolved.save(options.out_dir / "config.resolved");
  }

  summary.runs.resize(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::mutex log_mutex;

  auto run_seed = [&](std::size_t i) {
    const std::uint64_t seed = seeds[i];
    const auto prepared = prepare_dataset(table, cfg, seed);
    const fs::path ckpt = checkpoint_path(options.out_dir, seed);
    auto stats = to_doc(prepared.state);
    stamp(stats, "train");
    stats.save(stats_path_for(ckpt));

    nn::Model model(cfg.model);
    model.params() = nn::init_params(cfg.model, seed);
    if (cfg.train.output_bias == train::OutputBiasInit::TargetMean) train::init_output_bias(model, prepared.train);
    train::TrainConfig tc = cfg.train;
    tc.seed = seed;

    auto epoch_log = open_out(options.out_dir / ("epoch_log_seed" + std::to_string(seed) + ".csv"));
    train::write_epoch_log_header(epoch_log);
    train::FitCallbacks callbacks;
    callbacks.on_epoch = [&](const train::EpochReport& r) {
      train::write_epoch_log_row(epoch_log, r);
      epoch_log.flush();
      std::lock_guard lock(log_mutex);
      log << "seed " << seed << " epoch " << r.epoch << " train_loss " << format_double(r.train_loss) << " val_mae "
          << format_double(r.val_mae) << " lr " << format_double(r.learning_rate) << '\n';
    };
    callbacks.on_improvement = [&](const train::EpochReport& r, const nn::ModelParams& params) {
      nn::write_checkpoint(ckpt, cfg.model, params, seed, r.epoch);
    };
    const auto fit = train::fit(model, prepared.train, prepared.test, tc, callbacks);
    const auto eval = train::evaluate(model, prepared.test);

    SeedRun& run = summary.runs[i];
    run.seed = seed;
    run.best_epoch = fit.best_epoch;
    run.epochs_run = fit.history.size();
    run.val_loss = eval.loss;
    run.val_mae = eval.mae;
    run.train_events = prepared.train.size();
    run.val_events = prepared.test.size();
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < seeds.size(); i = next++) {
      try {
        run_seed(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(options.jobs, seeds.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<double> maes;
  for (const auto& r : summary.runs) maes.push_back(r.val_mae);
  summary.median_run = median_index(maes);
  if (maes.size() > 1) {
    const double mean = std::accumulate(maes.begin(), maes.end(), 0.0) / static_cast<double>(maes.size());
    double ss = 0.0;
    for (double m : maes) ss += (m - mean) * (m - mean);
    summary.mae_std = std::sqrt(ss / static_cast<double>(maes.size() - 1));
  }

  auto out = open_out(options.out_dir / "summary.csv");
  out << "kind,seed,best_epoch,epochs_run,train_events,val_events,val_loss,val_mae,param_count\n";
  for (const auto& r : summary.runs) {
    out << "run," << r.seed << ',' << r.best_epoch << ',' << r.epochs_run << ',' << r.train_events << ','
        << r.val_events << ',' << format_double(r.val_loss) << ',' << format_double(r.val_mae) << ','
        << summary.param_count << '\n';
  }
  const auto& med = summary.runs[summary.median_run];
  out << "median," << med.seed << ',' << med.best_epoch << ',' << med.epochs_run << ',' << med.train_events << ','
      << med.val_events << ',' << format_double(med.val_loss) << ',' << format_double(med.val_mae) << ','
      << summary.param_count << '\n';
  out << "std,,,,,,," << format_double(summary.mae_std) << ',' << summary.param_count << '\n';
  log << "median val MAE " << format_double(med.val_mae) << " (seed " << med.seed << "), std "
      << format_double(summary.mae_std) << ", " << summary.param_count << " parameters\n";
  return summary;
}

train::EvalResult cmd_eval(const EvalOptions& options, std::ostream& log) {
  if (options.checkpoint.empty()) throw UsageError("--checkpoint is required");
  if (options.data.empty()) throw UsageError("--data is required");
  const Subset subset = parse_subset(options.subset);
  if (!fs::exists(options.checkpoint)) throw DataError("checkpoint not found: " + options.checkpoint.string());
  if (!fs::exists(options.data)) throw DataError("data file not found: " + options.data.string());

  const auto ckp = nn::read_checkpoint(options.checkpoint);
  nn::Model model(ckp.config);
  model.params() = ckp.params;

  std::vector<graph::GraphSample> graphs;
  if (is_graph_dump(options.data)) {
    if (subset != Subset::All) throw UsageError("--subset applies to CSV input only");
    graphs = graph::read_graph_dump(options.data);
  } else {
    const fs::path stats_path = stats_path_for(options.checkpoint);
    if (!fs::exists(stats_path)) throw DataError("preprocessing stats not found: " + stats_path.string());
    const auto state = preprocess_state_from_doc(KeyValueDoc::load(stats_path));
    if (state.spec.method != ckp.config.graph_spec.method || state.spec.edge_mode != ckp.config.graph_spec.edge_mode) {
      throw DataError(stats_path.string() + ": graph settings differ from the checkpoint");
    }
    DataConfig dc;
    dc.path = options.data;
    dc.schema = options.schema;
    graphs = graphs_from_state(load_events(dc), state, subset);
  }
  const auto result = train::evaluate(model, graphs);

  ensure_dir(options.out);
  {
    auto out = open_out(options.out / "metrics.csv");
    out << "metric,value\n";
    out << "mae," << format_double(result.mae) << '\n';
    out << "loss," << format_double(result.loss) << '\n';
    out << "samples," << graphs.size() << '\n';
  }
  {
    auto out = open_out(options.out / "residuals.csv");
    out << "index,truth,prediction,residual\n";
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      out << i << ',' << format_double(graphs[i].target_pt) << ',' << format_double(result.predictions[i]) << ','
          << format_double(result.residuals[i]) << '\n';
    }
  }
  KeyValueDoc resolved;
  nn::write_model_config(resolved, ckp.config);
  stamp(resolved, "eval");
  resolved.set("eval.checkpoint", options.checkpoint.string());
  resolved.set("eval.data", options.data.string());
  resolved.set("eval.subset", options.subset);
  resolved.set("checkpoint.seed", std::to_string(ckp.seed));
  resolved.set("checkpoint.epoch", std::to_string(ckp.epoch));
  resolved.save(options.out / "config.resolved");

  log << "evaluated " << graphs.size() << " samples: MAE " << format_double(result.mae) << '\n';
  return result;
}

GradCheckReport cmd_gradcheck(const GradCheckOptions& options, std::ostream& log) {
  const RunConfig cfg = load_run_config(options.config, options.overrides);
  std::optional<ad::OpKind> corrupt;
  if (options.corrupt_adjoint) {
    corrupt = ad::op_from_name(*options.corrupt_adjoint);
    if (!corrupt || *corrupt == ad::OpKind::Leaf) {
      throw UsageError("--corrupt-adjoint: unknown op '" + *options.corrupt_adjoint + "'");
    }
  }
  CorruptionGuard guard(corrupt);
  const auto report = run_gradcheck(cfg.model, options.seed);
  write_gradcheck_report(log, report);
  if (!options.out.empty()) {
    auto out = open_out(options.out);
    write_gradcheck_report(out, report);
  }
  const auto failed = report.failures();
  if (failed.empty()) {
    log << "gradcheck: all " << report.entries.size() << " checks passed (tolerance "
        << format_double(report.tolerance) << ")\n";
  } else {
    log << "gradcheck: FAILED";
    for (const auto& f : failed) log << ' ' << f;
    log << '\n';
  }
  return report;
}

}  // namespace ptgnn::app
