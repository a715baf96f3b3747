// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ptgnn/ad/ops.hpp"
#include "ptgnn/app/commands.hpp"
#include "ptgnn/app/dataset.hpp"
#include "ptgnn/app/gradcheck_suite.hpp"
#include "ptgnn/common/kv_file.hpp"
#include "ptgnn/data/csv.hpp"
#include "ptgnn/data/features.hpp"
#include "ptgnn/data/preprocess.hpp"
#include "ptgnn/data/synth.hpp"
#include "ptgnn/graph/builders.hpp"
#include "ptgnn/loss/losses.hpp"
#include "ptgnn/nn/layers.hpp"
#include "ptgnn/nn/model.hpp"
#include "ptgnn/train/trainer.hpp"
#include "test_support.hpp"

using namespace ptgnn;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) status = Status::Fail;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
  void note(const std::string& what) { notes.push_back(what); }
};

std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- criterion 1
Outcome gradient_correctness() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  nn::ModelConfig base;
  struct Case {
    const char* label;
    nn::ModelConfig config;
  };
  std::vector<Case> cases;
  for (auto b : {nn::Backbone::MPL, nn::Backbone::EdgeConv, nn::Backbone::GCN}) {
    nn::ModelConfig c = base;
    c.backbone = b;
    cases.push_back({nn::to_string(b).data(), c});
  }
  nn::ModelConfig eta = base;
  eta.graph_spec.method = graph::GraphMethod::EtaCentric;
  cases.push_back({"mpl/eta", eta});

  double worst = 0.0;
  std::size_t checks = 0;
  for (const auto& c : cases) {
    const auto report = app::run_gradcheck(c.config, 1);
    for (const auto& e : report.entries) {
      worst = std::max(worst, e.max_rel_error);
      ++checks;
    }
    std::string failed;
    for (const auto& f : report.failures()) failed += " " + f;
    o.require(report.all_passed(), std::string(c.label) + " all components" + failed);
  }
  o.note(std::to_string(checks) + " checks, worst rel err " + fmt(worst, 3));

  // Negative control: a corrupted adjoint must be caught and named.
  ad::testing::corrupt_adjoint(ad::OpKind::SegmentSoftmax);
  const auto bad = app::run_gradcheck(base, 1);
  ad::testing::corrupt_adjoint(std::nullopt);
  bool named = false;
  for (const auto& f : bad.failures()) named = named || f.find("segment_softmax") != std::string::npos;
  o.require(!bad.all_passed() && named, "corrupted segment_softmax adjoint detected");

  const double secs = seconds_since(t0);
  o.require(secs < 120.0, "runtime " + fmt(secs, 3) + " s < 120 s");
  return o;
}

// ---------------------------------------------------------------- criterion 2
double pt_grad(double truth, double residual) {
  loss::LossConfig cfg;
  cfg.kind = loss::LossKind::PtInformed;
  std::vector<double> g(1);
  loss::pt_informed_loss(std::vector<double>{truth - residual}, std::vector<double>{truth}, cfg, g);
  return std::abs(g[0]);
}

Outcome proposition_1() {
  Outcome o;
  struct Pair {
    double t1, t2, w1, w2;
  };
  // Weights written out from the piecewise definition.
  const Pair pairs[] = {{160, 80, 12.4, 2.4}, {50, 160, 50, 12.4}, {79.9, 80, 79.9, 2.4},
                        {30, 120, 30, 2.4},   {200, 159, 12.4, 2.4}};
  for (double residual : {0.5, -3.0, 17.0}) {
    for (const auto& p : pairs) {
      const double ratio = pt_grad(p.t1, residual) / pt_grad(p.t2, residual);
      o.require(std::abs(ratio - p.w1 / p.w2) < 1e-10,
                "ratio " + fmt(p.t1) + "/" + fmt(p.t2) + " residual " + fmt(residual) + " = " + fmt(ratio, 12));
    }
  }
  o.require(loss::pt_weight(79.9) == 79.9 && loss::pt_weight(80) == 2.4, "W(79.9) = 79.9, W(80) = 2.4");
  return o;
}

// ---------------------------------------------------------------- criterion 3
Outcome proposition_2() {
  Outcome o;
  const double lpl = 2.0;
  o.require(loss::custom_pt_penalty(lpl, lpl) == 0.5, "P(lpl) = +0.5");
  o.require(std::abs(loss::custom_pt_penalty(lpl + 1e-9, lpl) + 0.5) < 1e-8, "P(lpl + 1e-9) within 1e-8 of -0.5");
  o.require(std::abs(loss::custom_pt_penalty(lpl + 10, lpl)) < 1e-10, "P(lpl + 10) within 1e-10 of 0");

  // The right limit is reached exactly once the step above lpl is below exp's
  // resolution; at lpl = 2 the smallest step still leaves an ulp-sized gap.
  const double small_lpl = 1e-3;
  const double exact_jump =
      loss::custom_pt_penalty(small_lpl, small_lpl) -
      loss::custom_pt_penalty(std::nextafter(small_lpl, 1.0), small_lpl);
  o.require(exact_jump == 1.0, "jump at lpl=0.001 = " + fmt(exact_jump, 17));
  const double jump2 = loss::custom_pt_penalty(lpl, lpl) - loss::custom_pt_penalty(std::nextafter(lpl, 3.0), lpl);
  o.require(std::abs(jump2 - 1.0) < 1e-15, "jump at lpl=2 = " + fmt(jump2, 17));

  bool monotone = true, in_range = true;
  double prev = -1.0;
  for (int i = 1; i <= 10000; ++i) {
    const double v = loss::custom_pt_penalty(lpl + 2e-3 * i, lpl);
    monotone = monotone && v >= prev;
    in_range = in_range && v >= -0.5 && v < 0.0;
    prev = v;
  }
  o.require(monotone, "monotone on 10^4-point grid above lpl");
  o.require(in_range, "penalty in [-1/2, 0) above lpl");
  return o;
}

// ---------------------------------------------------------------- criterion 4
using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

EdgeList as_pairs(const std::vector<graph::Edge>& edges) {
  EdgeList out;
  for (const auto& e : edges) out.push_back({e.src, e.dst});
  return out;
}

EdgeList sorted(EdgeList v) {
  std::sort(v.begin(), v.end());
  return v;
}

EdgeList brute_knn(const std::array<graph::EtaPhi, 4>& pts, std::size_t k) {
  EdgeList out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i == j) continue;
      double dphi = pts[j].phi - pts[i].phi;
      while (dphi > M_PI) dphi -= 2 * M_PI;
      while (dphi <= -M_PI) dphi += 2 * M_PI;
      const double deta = pts[j].eta - pts[i].eta;
      cand.push_back({deta * deta + dphi * dphi, j});
    }
    std::sort(cand.begin(), cand.end());
    for (std::size_t m = 0; m < k && m < cand.size(); ++m) out.push_back({i, cand[m].second});
  }
  return out;
}

Outcome graph_oracles() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  const auto ev = testsupport::random_event(rng);

  const EdgeList chain{{0, 1}, {1, 2}, {2, 3}, {3, 2}, {2, 1}, {1, 0}};
  const EdgeList hub{{0, 1}, {1, 0}, {1, 2}, {2, 1}, {2, 3}, {3, 2}, {0, 2},
                     {2, 0}, {2, 4}, {4, 2}, {2, 5}, {5, 2}, {2, 6}, {6, 2}};
  EdgeList full;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) full.push_back({i, j});

  o.require(sorted(as_pairs(graph::build_station_graph(ev).edges)) == sorted(chain), "method 1: 6-edge chain");
  o.require(sorted(as_pairs(graph::build_feature_graph(ev).edges)) == sorted(hub), "method 2: 14-edge hub");
  const auto bend = graph::build_bending_graph(ev);
  o.require(sorted(as_pairs(bend.edges)) == sorted(full) && bend.edge_attr.shape() == ad::Shape{12, 3},
            "method 3: 12 edges, attr (12, 3)");

  std::size_t matched = 0, shaped = 0, small_k = 0;
  const graph::EtaGraphStats stats;
  for (int i = 0; i < 1000; ++i) {
    auto e = testsupport::random_event(rng);
    // Some events with clustered or duplicated hits to exercise ties.
    if (i % 10 == 0) e.phi[2] = e.phi[1];
    if (i % 10 == 0) e.eta[2] = e.eta[1];
    if (i % 7 == 0) e.phi[3] = e.phi[0] + (e.phi[0] > 0 ? -2 * M_PI + 1e-3 : 2 * M_PI - 1e-3);
    std::array<graph::EtaPhi, 4> pts{};
    for (std::size_t s = 0; s < 4; ++s) pts[s] = {e.eta[s], e.phi[s]};
    const auto g = graph::build_eta_graph(e, stats, 3);
    if (as_pairs(g.edges) == brute_knn(pts, 3)) ++matched;
    if (g.edges.size() == 12 && g.edge_attr.shape() == ad::Shape{12, 3}) ++shaped;
    const std::size_t k = 1 + i % 2;
    if (as_pairs(graph::knn_edges(pts, k)) == brute_knn(pts, k)) ++small_k;
  }
  o.require(matched == 1000, "method 4 kNN matches brute force on " + std::to_string(matched) + "/1000 events");
  o.require(small_k == 1000, "kNN with k = 1, 2 matches brute force on " + std::to_string(small_k) + "/1000 events");
  o.require(shaped == 1000, "method 4: 12 edges, attr dim 3 on " + std::to_string(shaped) + "/1000 events");
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime " + fmt(secs, 3) + " s < 60 s");
  return o;
}

// ---------------------------------------------------------------- criterion 5
Outcome pipeline_numerics() {
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i <= 6000; ++i) {
    const double eta = -3.0 + 1e-3 * i;
    const double theta = 2.0 * std::atan(std::exp(-eta));
    worst = std::max(worst, std::abs(data::eta_from_theta(theta) - eta));
  }
  o.require(worst < 1e-9, "eta round trip on [-3, 3], max err " + fmt(worst, 3));

  const auto table = data::synth_generate(5000, 5);
  std::vector<data::EngineeredEvent> events;
  for (const auto& r : table.rows) events.push_back(data::engineer_features(r));
  const auto split = data::train_test_split(events.size(), {0.8, 5});
  std::vector<data::EngineeredEvent> train;
  for (auto i : split.train) train.push_back(events[i]);
  const auto full_stats = data::fit_standardizer(data::full_matrix(train));
  const auto compact_stats = data::fit_standardizer(data::compact_matrix(train));
  data::standardize_events(train, full_stats, compact_stats);
  double worst_mean = 0.0, worst_std = 0.0;
  std::size_t degenerate = 0;
  auto check = [&](const ad::Tensor& m, const data::FeatureStats& s) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
      mean /= static_cast<double>(m.rows());
      for (std::size_t r = 0; r < m.rows(); ++r) sq += (m(r, c) - mean) * (m(r, c) - mean);
      const double sd = std::sqrt(sq / static_cast<double>(m.rows()));
      worst_mean = std::max(worst_mean, std::abs(mean));
      if (s.degenerate[c]) {
        ++degenerate;
      } else {
        worst_std = std::max(worst_std, std::abs(sd - 1.0));
      }
    }
  };
  check(data::full_matrix(train), full_stats);
  check(data::compact_matrix(train), compact_stats);
  o.require(worst_mean < 1e-9, "standardized train means, max |mean| " + fmt(worst_mean, 3));
  o.require(worst_std < 1e-9, "standardized train stds, max |std - 1| " + fmt(worst_std, 3) + " (" +
                                  std::to_string(degenerate) + " constant columns flagged)");

  const auto big = data::train_test_split(1179356, {0.8, 1});
  o.require(big.train.size() == 943484 && big.test.size() == 235872,
            "split 1179356 -> " + std::to_string(big.train.size()) + "/" + std::to_string(big.test.size()));

  const char* kaggle = std::getenv("PTGNN_KAGGLE_CSV");
  if (kaggle && *kaggle) {
    const char* schema = std::getenv("PTGNN_KAGGLE_SCHEMA");
    const auto t = data::parse_csv(kaggle, schema && *schema ? data::CsvSchema::load(schema) : data::CsvSchema::canonical());
    std::vector<double> pt;
    for (const auto& r : t.rows) pt.push_back(data::compute_target_pt(r.q_over_pt));
    const auto kept = data::iqr_filter(pt).kept.size();
    const long long diff = static_cast<long long>(kept) - 1029592;
    o.require(std::llabs(diff) <= 10, "external dataset IQR keeps " + std::to_string(kept) + " rows (target 1029592 +/- 10)");
  } else {
    o.note("external-dataset IQR count SKIP (PTGNN_KAGGLE_CSV not set)");
  }
  return o;
}

// ---------------------------------------------------------------- criterion 6
template <typename T>
std::vector<T> reorder(const std::vector<T>& v, const std::vector<std::size_t>& order) {
  std::vector<T> out;
  for (auto i : order) out.push_back(v[i]);
  return out;
}

ad::Tensor reorder_rows(const ad::Tensor& t, const std::vector<std::size_t>& order) {
  ad::Tensor out({order.size(), t.cols()});
  for (std::size_t r = 0; r < order.size(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) out(r, c) = t(order[r], c);
  return out;
}

void randomize(nn::ModelParams& params, std::uint64_t seed) {
  nn::glorot_init(params, seed);
  Rng rng(seed ^ 0x5eed);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& b = params.block(i);
    if (b.name.ends_with(".bias"))
      for (double& v : b.value.values()) v = rng.uniform(-0.1, 0.1);
  }
}

Outcome invariance() {
  Outcome o;
  Rng rng(77);
  bool edge_order_ok = true;
  double worst_attn = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng.below(4);
    const auto x = testsupport::random_matrix(rng, n, 5, 2.0);
    const auto edges = graph::fully_connected_edges(n);
    const auto attr = testsupport::random_matrix(rng, edges.size(), 3);
    nn::ModelParams p;
    const auto mpl = nn::MplLayer::create(p, "mpl", {5, 6, 3});
    const auto ec = nn::EdgeConvLayer::create(p, "ec", 5, 6, 2);
    const auto gcn = nn::GcnLayer::create(p, "gcn", 5, 6);
    randomize(p, 100 + trial);

    auto run = [&](const std::vector<graph::Edge>& es, const ad::Tensor& ea, nn::MplTrace* tr) {
      ad::Tape tape;
      const auto bound = p.bind(tape);
      const auto xv = tape.constant(x);
      std::array<ad::Tensor, 3> out{
          tape.value(nn::mpl_forward(tape, mpl, bound, xv, es, tape.constant(ea), tr)),
          tape.value(nn::edgeconv_forward(tape, ec, bound, xv, es)),
          tape.value(nn::gcn_forward(tape, gcn, bound, xv, es))};
      return out;
    };
    nn::MplTrace trace;
    const auto ref = run(edges, attr, &trace);
    std::vector<double> sums(n, 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) sums[edges[e].dst] += trace.attention[e];
    for (double s : sums) worst_attn = std::max(worst_attn, std::abs(s - 1.0));

    std::vector<std::size_t> order(edges.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto got = run(reorder(edges, order), reorder_rows(attr, order), nullptr);
    edge_order_ok = edge_order_ok && got == ref;
  }
  o.require(edge_order_ok, "MPL/EdgeConv/GCN bit-identical under 50 edge-order permutations");
  o.require(worst_attn <= 1e-12, "attention sums to 1, max deviation " + fmt(worst_attn, 3));

  double worst_relabel = 0.0;
  for (auto backbone : {nn::Backbone::MPL, nn::Backbone::EdgeConv, nn::Backbone::GCN}) {
    for (auto method : {graph::GraphMethod::BendingCentric, graph::GraphMethod::StationNode}) {
      nn::ModelConfig c;
      c.backbone = backbone;
      c.embed_dim = 12;
      c.graph_spec.method = method;
      c.graph_spec.edge_mode =
          method == graph::GraphMethod::StationNode ? graph::EdgeMode::FullyConnected : graph::EdgeMode::AsPaper;
      nn::Model m(c);
      m.params() = nn::init_params(c, 5);
      for (int t = 0; t < 20; ++t) {
        const auto g = graph::build_graph(testsupport::random_event(rng), c.graph_spec);
        std::vector<std::size_t> perm(4);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        graph::GraphSample h = g;
        for (std::size_t i = 0; i < 4; ++i)
          for (std::size_t d = 0; d < g.node_dim(); ++d) h.node_features(perm[i], d) = g.node_features(i, d);
        for (auto& e : h.edges) e = {perm[e.src], perm[e.dst]};
        worst_relabel = std::max(worst_relabel, std::abs(m.predict(h) - m.predict(g)));
      }
    }
  }
  o.require(worst_relabel < 1e-9, "prediction under node relabeling, max diff " + fmt(worst_relabel, 3));
  return o;
}

// ---------------------------------------------------------------- criterion 7
struct LearnRun {
  double best_val_loss = 0.0;
  double first_val_loss = 0.0;
  double val_mae = 0.0;
  std::size_t epochs = 0;
  bool best_non_increasing = true;
};

LearnRun learn(const app::PreparedDataset& data, nn::ModelConfig model_cfg, loss::LossKind kind,
               std::uint64_t seed) {
  model_cfg.loss.kind = kind;
  nn::Model model(model_cfg);
  model.params() = nn::init_params(model_cfg, seed);
  train::init_output_bias(model, data.train);
  train::TrainConfig tc;  // lr 1e-4, batch 32, 50 epochs, early stopping
  tc.seed = seed;
  const auto fit = train::fit(model, data.train, data.test, tc);
  LearnRun r;
  r.first_val_loss = fit.history.front().val_loss;
  r.best_val_loss = fit.best_val_loss;
  r.epochs = fit.history.size();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& h : fit.history) {
    const double next = std::min(best, h.val_loss);
    r.best_non_increasing = r.best_non_increasing && next <= best;
    best = next;
  }
  r.val_mae = train::evaluate(model, data.test).mae;
  return r;
}

Outcome learning_sanity() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = 7;
  app::RunConfig cfg;
  cfg.model.backbone = nn::Backbone::EdgeConv;
  cfg.model.num_layers = 4;
  cfg.model.embed_dim = 16;
  cfg.model.graph_spec.method = graph::GraphMethod::StationNode;
  const auto table = data::synth_generate(20000, seed);
  const auto data = app::prepare_dataset(table, cfg, seed);

  double mean = 0.0;
  for (const auto& g : data.train) mean += g.target_pt;
  mean /= static_cast<double>(data.train.size());
  double baseline = 0.0;
  for (const auto& g : data.test) baseline += std::abs(g.target_pt - mean);
  baseline /= static_cast<double>(data.test.size());

  const auto mse = learn(data, cfg.model, loss::LossKind::MSE, seed);
  o.require(mse.val_mae < 0.7 * baseline, "MSE val MAE " + fmt(mse.val_mae, 4) + " < 0.7 x mean-predictor " +
                                               fmt(baseline, 4) + " (" + std::to_string(mse.epochs) + " epochs)");
  o.require(mse.best_non_increasing && mse.best_val_loss < mse.first_val_loss,
            "MSE converges: best val loss " + fmt(mse.first_val_loss, 4) + " -> " + fmt(mse.best_val_loss, 4));

  const auto custom = learn(data, cfg.model, loss::LossKind::CustomPt, seed);
  o.require(custom.best_non_increasing && custom.best_val_loss < custom.first_val_loss,
            "custom loss converges: best val loss " + fmt(custom.first_val_loss, 4) + " -> " +
                fmt(custom.best_val_loss, 4));
  o.note("custom loss val MAE " + fmt(custom.val_mae, 4) + " (" + fmt(custom.val_mae / baseline, 3) +
         " x mean-predictor, informational)");
  const double secs = seconds_since(t0);
  o.require(secs < 900.0, "runtime " + fmt(secs, 4) + " s < 900 s");
  return o;
}

// ---------------------------------------------------------------- criterion 8
std::vector<std::string> log_without_seconds(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) rows.push_back(line.substr(0, line.rfind(',')));
  return rows;
}

Outcome determinism() {
  Outcome o;
  testsupport::TempDir dir("accept8");
  std::ostringstream log;
  app::cmd_synth({3000, 11, dir / "events.csv"}, log);
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "data.path = events.csv\nmodel.backbone = mpl\nmodel.embed_dim = 8\nmodel.num_layers = 2\n"
           "graph.method = bending\ntrain.max_epochs = 4\ntrain.learning_rate = 0.003\nloss.kind = pt\n";
  }
  app::TrainOptions opt;
  opt.config = dir / "run.cfg";
  opt.seeds = {4, 5};
  opt.out_dir = dir / "a";
  const auto a = app::cmd_train(opt, log);
  opt.out_dir = dir / "b";
  opt.jobs = 2;
  app::cmd_train(opt, log);

  for (auto seed : opt.seeds) {
    const std::string name = "epoch_log_seed" + std::to_string(seed) + ".csv";
    const auto la = log_without_seconds(dir / "a" / name);
    const auto lb = log_without_seconds(dir / "b" / name);
    o.require(la == lb && la.size() > 1, "seed " + std::to_string(seed) + " epoch logs identical (" +
                                             std::to_string(la.size() - 1) + " epochs, seconds column excluded)");
    const auto ca = testsupport::read_file(dir / "a" / ("model_seed" + std::to_string(seed) + ".ckpt"));
    const auto cb = testsupport::read_file(dir / "b" / ("model_seed" + std::to_string(seed) + ".ckpt"));
    o.require(ca == cb, "seed " + std::to_string(seed) + " checkpoints byte-identical");
  }
  o.require(testsupport::read_file(dir / "a" / "summary.csv") == testsupport::read_file(dir / "b" / "summary.csv"),
            "summaries identical");

  for (const auto& run : a.runs) {
    app::EvalOptions ev;
    ev.checkpoint = dir / "a" / ("model_seed" + std::to_string(run.seed) + ".ckpt");
    ev.data = dir / "events.csv";
    ev.subset = "test";
    ev.out = dir / ("eval" + std::to_string(run.seed));
    const auto r = app::cmd_eval(ev, log);
    o.require(r.mae == run.val_mae, "seed " + std::to_string(run.seed) + " reloaded val MAE " +
                                        format_double(r.mae) + " == " + format_double(run.val_mae));
  }
  return o;
}

// ---------------------------------------------------------------- criterion 9
Outcome full_data_pathway() {
  Outcome o;
  o.status = Status::Skip;
  const char* kaggle = std::getenv("PTGNN_KAGGLE_CSV");
  if (kaggle && *kaggle) {
    o.note("dataset found at " + std::string(kaggle) + "; run scripts/reproduce_table1.sh (hours of CPU time)");
  } else {
    o.note("external dataset not present; pathway documented in scripts/reproduce_table1.sh");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "gradient correctness", gradient_correctness},
      {2, "proposition 1 (weighted loss gradients)", proposition_1},
      {3, "proposition 2 (custom penalty)", proposition_2},
      {4, "graph-builder oracles", graph_oracles},
      {5, "pipeline numerics", pipeline_numerics},
      {6, "invariance suite", invariance},
      {7, "desk-scale learning sanity", learning_sanity},
      {8, "determinism and round trip", determinism},
      {9, "conditional full-data pathway", full_data_pathway},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.status = Status::Fail;
      o.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    if (o.status == Status::Fail) ++failures;
    std::cout << "criterion " << c.id << ": " << tag << "  " << c.title << "  [" << fmt(secs, 3) << " s]\n";
    for (const auto& n : o.notes) std::cout << "    " << n << '\n';
    std::cout.flush();
  }
  std::cout << (failures ? "acceptance: FAILED (" + std::to_string(failures) + " criteria)" : "acceptance: all criteria met")
            << '\n';
  return failures ? 1 : 0;
}
