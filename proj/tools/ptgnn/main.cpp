#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ptgnn/app/commands.hpp"
#include "ptgnn/common/errors.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : ptgnn::split(text, ',')) {
    const std::string t = ptgnn::trim(item);
    if (t.empty()) continue;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      seeds.push_back(v);
    } catch (const std::exception&) {
      throw ptgnn::UsageError("--seeds: '" + t + "' is not a non-negative integer");
    }
  }
  if (seeds.empty()) throw ptgnn::UsageError("--seeds: empty list");
  return seeds;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ptgnn::app;

  CLI::App app{"Physics-informed graph neural networks for muon pT regression"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  SynthOptions synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic event CSV");
  c_synth->add_option("--n", synth.n, "Number of events")->required();
  c_synth->add_option("--seed", synth.seed, "Generator seed");
  c_synth->add_option("--out", synth.out, "Output CSV path")->required();

  BuildGraphsOptions build;
  auto* c_build = app.add_subcommand("build-graphs", "Convert an event CSV into a graph dump");
  c_build->add_option("--in", build.in, "Event CSV")->required();
  c_build->add_option("--schema", build.schema, "Column mapping file for foreign CSV layouts");
  c_build->add_option("--method", build.method, "station|feature|bending|eta");
  c_build->add_option("--edge-mode", build.edge_mode, "paper|full|sequential (station method only)");
  c_build->add_option("--knn-k", build.knn_k, "Neighbours per node for the eta method");
  c_build->add_option("--iqr", build.iqr, "Target outlier filter: auto|on|off");
  c_build->add_option("--train-fraction", build.train_fraction, "Split used to fit standardizers");
  c_build->add_option("--seed", build.seed, "Split seed");
  c_build->add_option("--out", build.out, "Output dump path")->required();

  TrainOptions train;
  std::string seeds_text;
  auto* c_train = app.add_subcommand("train", "Train one model per seed");
  c_train->add_option("--config", train.config, "key = value config file");
  c_train->add_option("--data", train.data, "Event CSV (overrides data.path)");
  c_train->add_option("--seeds", seeds_text, "Comma-separated seeds, e.g. 1,2,3");
  c_train->add_option("--out-dir", train.out_dir, "Output directory")->required();
  c_train->add_option("--jobs", train.jobs, "Seeds trained in parallel");
  c_train->add_option("--set", train.overrides, "Config override key=value (repeatable)");

  EvalOptions eval;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  c_eval->add_option("--checkpoint", eval.checkpoint, "Checkpoint written by train")->required();
  c_eval->add_option("--data", eval.data, "Event CSV or graph dump")->required();
  c_eval->add_option("--schema", eval.schema, "Column mapping file for foreign CSV layouts");
  c_eval->add_option("--subset", eval.subset, "all|train|test (CSV input)");
  c_eval->add_option("--out", eval.out, "Output directory")->required();

  GradCheckOptions grad;
  std::string corrupt;
  auto* c_grad = app.add_subcommand("gradcheck", "Finite-difference check of every layer and loss");
  c_grad->add_option("--config", grad.config, "key = value config file");
  c_grad->add_option("--seed", grad.seed, "Instance seed");
  c_grad->add_option("--set", grad.overrides, "Config override key=value (repeatable)");
  c_grad->add_option("--out", grad.out, "Also write the report to this file");
  c_grad->add_option("--corrupt-adjoint", corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (c_synth->parsed()) {
      cmd_synth(synth, std::cout);
    } else if (c_build->parsed()) {
      cmd_build_graphs(build, std::cout);
    } else if (c_train->parsed()) {
      if (!seeds_text.empty()) train.seeds = parse_seeds(seeds_text);
      cmd_train(train, std::cout);
    } else if (c_eval->parsed()) {
      cmd_eval(eval, std::cout);
    } else if (c_grad->parsed()) {
      if (!corrupt.empty()) grad.corrupt_adjoint = corrupt;
      const auto report = cmd_gradcheck(grad, std::cout);
      return report.all_passed() ? kOk : kNumerical;
    }
  } catch (const ptgnn::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ptgnn::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const ptgnn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
