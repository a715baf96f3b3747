#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "ptgnn/common/rng.hpp"
#include "ptgnn/data/features.hpp"
#include "ptgnn/data/synth.hpp"
#include "ptgnn/graph/builders.hpp"
#include "ptgnn/nn/model.hpp"
#include "ptgnn/train/trainer.hpp"

using namespace ptgnn;

namespace {

std::vector<data::EngineeredEvent> events(std::size_t n) {
  const auto table = data::synth_generate(n, 1);
  std::vector<data::EngineeredEvent> out;
  for (const auto& r : table.rows) {
    auto e = data::engineer_features(r);
    e.standardized = true;  // raw scale is fine for timing
    out.push_back(e);
  }
  return out;
}

graph::GraphSpec spec_for(int method) {
  graph::GraphSpec s;
  s.method = static_cast<graph::GraphMethod>(method);
  return s;
}

void BM_BuildGraphs(benchmark::State& state) {
  const auto ev = events(1000);
  const auto spec = spec_for(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(graph::build_graphs(ev, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ev.size()));
  state.SetLabel(std::string(graph::to_string(spec.method)));
}
BENCHMARK(BM_BuildGraphs)->DenseRange(0, 3);

void BM_Knn(benchmark::State& state) {
  Rng rng(3);
  std::vector<graph::EtaPhi> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& p : pts) p = {rng.uniform(-2.5, 2.5), rng.uniform(-M_PI, M_PI)};
  for (auto _ : state) benchmark::DoNotOptimize(graph::knn_edges(pts, 3));
}
BENCHMARK(BM_Knn)->Arg(4)->Arg(16)->Arg(64);

nn::ModelConfig model_config(int backbone, std::size_t embed) {
  nn::ModelConfig c;
  c.backbone = static_cast<nn::Backbone>(backbone);
  c.embed_dim = embed;
  c.graph_spec.method = graph::GraphMethod::BendingCentric;
  return c;
}

void BM_Predict(benchmark::State& state) {
  const auto c = model_config(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  nn::Model m(c);
  m.params() = nn::init_params(c, 1);
  const auto g = graph::build_graph(events(1).front(), c.graph_spec);
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(g));
  state.SetLabel(std::string(nn::to_string(c.backbone)));
}
BENCHMARK(BM_Predict)->ArgsProduct({{0, 1, 2}, {16, 64}});

void BM_SampleGradient(benchmark::State& state) {
  const auto c = model_config(static_cast<int>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  nn::Model m(c);
  m.params() = nn::init_params(c, 1);
  const auto g = graph::build_graph(events(1).front(), c.graph_spec);
  for (auto _ : state) benchmark::DoNotOptimize(train::sample_gradient(m, g));
  state.SetLabel(std::string(nn::to_string(c.backbone)));
}
BENCHMARK(BM_SampleGradient)->ArgsProduct({{0, 1, 2}, {16, 64}});

}  // namespace

BENCHMARK_MAIN();
