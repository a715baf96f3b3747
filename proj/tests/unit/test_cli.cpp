#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "ptgnn/app/commands.hpp"
#include "ptgnn/common/errors.hpp"
#include "ptgnn/graph/dump.hpp"
#include "test_support.hpp"

using namespace ptgnn;
using namespace ptgnn::app;
using testsupport::TempDir;

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::string csv_field(const std::string& line, std::size_t index) {
  const auto parts = split(line, ',');
  return index < parts.size() ? parts[index] : "";
}

void write_small_config(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path);
  out << "data.path = " << data << "\n"
      << "model.backbone = edgeconv\n"
      << "model.num_layers = 2\n"
      << "model.embed_dim = 8\n"
      << "train.max_epochs = 3\n"
      << "train.batch_size = 16\n"
      << "train.learning_rate = 0.01\n";
}

#ifdef PTGNN_TOOL_PATH
int run_tool(const std::string& args) {
  const std::string cmd = std::string("\"") + PTGNN_TOOL_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("synth command") {
  TempDir dir("synth");
  std::ostringstream log;
  cmd_synth({1000, 5, dir / "a.csv"}, log);
  cmd_synth({1000, 5, dir / "b.csv"}, log);
  CHECK(testsupport::count_lines(dir / "a.csv") == 1001);
  CHECK(testsupport::read_file(dir / "a.csv") == testsupport::read_file(dir / "b.csv"));
  CHECK(std::filesystem::exists(dir / "a.csv.provenance"));
  try {
    cmd_synth({10, 5, dir / "no_such_dir" / "x.csv"}, log);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("no_such_dir") != std::string::npos);
  }
}

TEST_CASE("build-graphs command") {
  TempDir dir("graphs");
  std::ostringstream log;
  cmd_synth({10, 2, dir / "ev.csv"}, log);

  BuildGraphsOptions st;
  st.in = dir / "ev.csv";
  st.method = "station";
  st.edge_mode = "sequential";
  st.out = dir / "station.bin";
  CHECK(cmd_build_graphs(st, log) == 10);
  const auto sg = graph::read_graph_dump(dir / "station.bin");
  CHECK(sg.size() == 10);
  for (const auto& g : sg) CHECK(g.num_edges() == 6);

  BuildGraphsOptions eta = st;
  eta.method = "eta";
  eta.edge_mode = "paper";
  eta.iqr = "off";
  eta.out = dir / "eta.bin";
  CHECK(cmd_build_graphs(eta, log) == 10);
  for (const auto& g : graph::read_graph_dump(dir / "eta.bin")) {
    CHECK(g.num_edges() == 12);
    CHECK(g.edge_dim() == 3);
  }
  CHECK(std::filesystem::exists(dir / "eta.bin.stats"));

  BuildGraphsOptions bad = st;
  bad.method = "spiral";
  try {
    cmd_build_graphs(bad, log);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("bending") != std::string::npos);
  }
}

TEST_CASE("train and eval commands") {
  TempDir dir("train");
  std::ostringstream log;
  cmd_synth({300, 3, dir / "ev.csv"}, log);
  write_small_config(dir / "run.cfg", "ev.csv");

  TrainOptions opt;
  opt.config = dir / "run.cfg";
  opt.seeds = {1, 2, 3};
  opt.out_dir = dir / "out1";
  const auto summary = cmd_train(opt, log);
  CHECK(summary.runs.size() == 3);
  for (int s = 1; s <= 3; ++s) {
    CHECK(std::filesystem::exists(dir / "out1" / ("epoch_log_seed" + std::to_string(s) + ".csv")));
    CHECK(std::filesystem::exists(dir / "out1" / ("model_seed" + std::to_string(s) + ".ckpt")));
  }
  const auto lines = read_lines(dir / "out1" / "summary.csv");
  REQUIRE(lines.size() == 6);
  CHECK(csv_field(lines[4], 0) == "median");
  CHECK(csv_field(lines[5], 0) == "std");
  const auto cfg = load_run_config(dir / "run.cfg", {});
  CHECK(summary.param_count == nn::param_count(cfg.model));
  CHECK(csv_field(lines[5], 8) == std::to_string(nn::param_count(cfg.model)));

  std::vector<double> maes;
  for (const auto& r : summary.runs) maes.push_back(r.val_mae);
  CHECK(summary.median_run == median_index(maes));
  CHECK(median_index({3.0, 1.0, 2.0}) == 2);
  CHECK(median_index({4.0, 1.0, 3.0, 2.0}) == 3);

  opt.out_dir = dir / "out2";
  cmd_train(opt, log);
  CHECK(testsupport::read_file(dir / "out1" / "summary.csv") == testsupport::read_file(dir / "out2" / "summary.csv"));

  // Evaluate the median checkpoint on its own validation split.
  const auto& med = summary.runs[summary.median_run];
  EvalOptions ev;
  ev.checkpoint = dir / "out1" / ("model_seed" + std::to_string(med.seed) + ".ckpt");
  ev.data = dir / "ev.csv";
  ev.subset = "test";
  ev.out = dir / "eval";
  const auto result = cmd_eval(ev, log);
  CHECK(result.mae == med.val_mae);
  CHECK(result.predictions.size() == med.val_events);
  CHECK(testsupport::count_lines(dir / "eval" / "residuals.csv") == med.val_events + 1);
  const auto metrics = read_lines(dir / "eval" / "metrics.csv");
  REQUIRE(metrics.size() >= 2);
  CHECK(metrics[1] == "mae," + format_double(result.mae));

  ev.subset = "all";
  CHECK(cmd_eval(ev, log).predictions.size() == 300);

  ev.checkpoint = dir / "missing.ckpt";
  try {
    cmd_eval(ev, log);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("missing.ckpt") != std::string::npos);
  }

  opt.overrides = {"train.bogus=1"};
  CHECK_THROWS_AS(cmd_train(opt, log), UsageError);
}

TEST_CASE("gradcheck command") {
  std::ostringstream log;
  GradCheckOptions opt;
  const auto ok = cmd_gradcheck(opt, log);
  CHECK(ok.all_passed());
  CHECK(ok.entries.size() > 20);
  for (const auto& e : ok.entries) CHECK(e.max_rel_error < 1e-4);

  opt.corrupt_adjoint = "tanh";
  const auto bad = cmd_gradcheck(opt, log);
  CHECK_FALSE(bad.all_passed());
  bool named = false;
  for (const auto& f : bad.failures()) named = named || f.find("tanh") != std::string::npos;
  CHECK(named);
  CHECK_FALSE(ad::testing::corrupted_adjoint().has_value());

  opt.corrupt_adjoint = "no_such_op";
  CHECK_THROWS_AS(cmd_gradcheck(opt, log), UsageError);
}

#ifdef PTGNN_TOOL_PATH
TEST_CASE("tool exit codes") {
  TempDir dir("tool");
  const std::string out = (dir / "ev.csv").string();
  CHECK(run_tool("--version") == 0);
  CHECK(run_tool("synth --n 20 --seed 1 --out \"" + out + "\"") == 0);
  CHECK(run_tool("synth --seed 1") == 1);
  CHECK(run_tool("build-graphs --in \"" + out + "\" --method spiral --out \"" + (dir / "g.bin").string() + "\"") == 1);
  CHECK(run_tool("build-graphs --in \"" + (dir / "absent.csv").string() + "\" --out \"" + (dir / "g.bin").string() +
                 "\"") == 2);
  CHECK(run_tool("eval --checkpoint \"" + (dir / "none.ckpt").string() + "\" --data \"" + out + "\" --out \"" +
                 (dir / "ev").string() + "\"") == 2);
  CHECK(run_tool("gradcheck --set model.embed_dim=4") == 0);
  CHECK(run_tool("gradcheck --set model.embed_dim=4 --corrupt-adjoint segment_softmax") == 3);
}
#endif
