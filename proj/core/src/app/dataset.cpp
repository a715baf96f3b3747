#include "ptgnn/app/dataset.hpp"

#include "ptgnn/common/errors.hpp"
#include "ptgnn/common/rng.hpp"
#include "ptgnn/data/csv.hpp"
#include "ptgnn/data/features.hpp"

namespace ptgnn::app {

namespace {

std::vector<data::EngineeredEvent> engineer_all(const data::EventTable& table, std::size_t* clamps) {
  data::EngineeringCounters counters;
  std::vector<data::EngineeredEvent> events;
  events.reserve(table.rows.size());
  for (const auto& row : table.rows) events.push_back(data::engineer_features(row, &counters));
  if (clamps) *clamps = counters.theta_clamps;
  return events;
}

std::vector<data::EngineeredEvent> pick(const std::vector<data::EngineeredEvent>& events,
                                        const std::vector<std::size_t>& idx) {
  std::vector<data::EngineeredEvent> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(events[i]);
  return out;
}

std::vector<data::EngineeredEvent> apply_bounds(std::vector<data::EngineeredEvent> events, double lower, double upper) {
  std::erase_if(events, [&](const data::EngineeredEvent& e) { return e.pt_true < lower || e.pt_true > upper; });
  return events;
}

}  // namespace

data::EventTable load_events(const DataConfig& config) {
  if (config.path.empty()) throw UsageError("no input data: set data.path or pass --data");
  if (!std::filesystem::exists(config.path)) throw DataError("data file not found: " + config.path.string());
  const auto schema = config.schema.empty() ? data::CsvSchema::canonical() : data::CsvSchema::load(config.schema);
  return data::parse_csv(config.path, schema);
}

KeyValueDoc to_doc(const PreprocessState& s) {
  KeyValueDoc doc;
  doc.set("stats.version", std::to_string(kStatsVersion));
  doc.set("stats.seed", std::to_string(s.seed));
  doc.set("stats.train_fraction", s.train_fraction);
  doc.set("stats.theta_clamps", std::to_string(s.theta_clamps));
  doc.set("graph.method", std::string(graph::to_string(s.spec.method)));
  doc.set("graph.edge_mode", std::string(graph::to_string(s.spec.edge_mode)));
  doc.set("graph.knn_k", std::to_string(s.spec.knn_k));
  doc.set("iqr.applied", s.iqr_applied ? "1" : "0");
  if (s.iqr_applied) {
    doc.set("iqr.q1", s.iqr.q1);
    doc.set("iqr.q3", s.iqr.q3);
    doc.set("iqr.lower", s.iqr.lower);
    doc.set("iqr.upper", s.iqr.upper);
  }
  data::write_feature_stats(doc, "full", s.full);
  data::write_feature_stats(doc, "compact", s.compact);
  graph::write_eta_graph_stats(doc, "eta", s.eta);
  return doc;
}

PreprocessState preprocess_state_from_doc(const KeyValueDoc& doc) {
  if (doc.get_or("stats.version", "") != std::to_string(kStatsVersion)) {
    throw DataError("stats file: unsupported or missing stats.version");
  }
  PreprocessState s;
  s.seed = static_cast<std::uint64_t>(doc.get_int("stats.seed"));
  s.train_fraction = doc.get_double("stats.train_fraction");
  s.theta_clamps = static_cast<std::size_t>(doc.get_int("stats.theta_clamps"));
  try {
    s.spec.method = graph::parse_method(doc.get("graph.method"));
    s.spec.edge_mode = graph::parse_edge_mode(doc.get("graph.edge_mode"));
  } catch (const UsageError& e) {
    throw DataError(std::string("stats file: ") + e.what());
  }
  s.spec.knn_k = static_cast<std::size_t>(doc.get_int("graph.knn_k"));
  s.iqr_applied = doc.get("iqr.applied") == "1";
  if (s.iqr_applied) {
    s.iqr.q1 = doc.get_double("iqr.q1");
    s.iqr.q3 = doc.get_double("iqr.q3");
    s.iqr.lower = doc.get_double("iqr.lower");
    s.iqr.upper = doc.get_double("iqr.upper");
  }
  s.full = data::read_feature_stats(doc, "full");
  s.compact = data::read_feature_stats(doc, "compact");
  s.eta = graph::read_eta_graph_stats(doc, "eta");
  return s;
}

PreparedDataset prepare_dataset(const data::EventTable& table, const RunConfig& config, std::uint64_t seed) {
  PreparedDataset out;
  auto& state = out.state;
  state.seed = seed;
  state.train_fraction = config.data.train_fraction;
  state.spec = config.model.graph_spec;
  out.input_rows = table.rows.size();

  auto events = engineer_all(table, &state.theta_clamps);
  if (config.data.iqr_enabled(state.spec.method)) {
    if (events.empty()) throw DataError("no events to filter");
    std::vector<double> pts;
    pts.reserve(events.size());
    for (const auto& e : events) pts.push_back(e.pt_true);
    state.iqr = data::iqr_filter(pts);
    state.iqr_applied = true;
    events = pick(events, state.iqr.kept);
    state.iqr.kept.clear();
    out.iqr_removed = out.input_rows - events.size();
  }

  out.split = data::train_test_split(
      events.size(), data::SplitSpec{state.train_fraction, derive_seed(seed, Stream::Split)});
  auto train_events = pick(events, out.split.train);
  auto test_events = pick(events, out.split.test);

  state.full = data::fit_standardizer(data::full_matrix(train_events));
  state.compact = data::fit_standardizer(data::compact_matrix(train_events));
  data::standardize_events(train_events, state.full, state.compact);
  data::standardize_events(test_events, state.full, state.compact);
  if (state.spec.method == graph::GraphMethod::EtaCentric) {
    state.eta = graph::fit_eta_graph_stats(train_events, state.spec.knn_k);
  }

  out.train = graph::build_graphs(train_events, state.spec, state.eta);
  out.test = graph::build_graphs(test_events, state.spec, state.eta);
  return out;
}

Subset parse_subset(std::string_view name) {
  if (name == "all") return Subset::All;
  if (name == "train") return Subset::Train;
  if (name == "test") return Subset::Test;
  throw UsageError("unknown subset '" + std::string(name) + "' (valid: all, train, test)");
}

std::vector<graph::GraphSample> graphs_from_state(const data::EventTable& table, const PreprocessState& state,
                                                  Subset subset) {
  auto events = engineer_all(table, nullptr);
  if (state.iqr_applied) events = apply_bounds(std::move(events), state.iqr.lower, state.iqr.upper);
  if (subset != Subset::All) {
    const auto split = data::train_test_split(
        events.size(), data::SplitSpec{state.train_fraction, derive_seed(state.seed, Stream::Split)});
    events = pick(events, subset == Subset::Train ? split.train : split.test);
  }
  if (events.empty()) throw DataError("no events left to evaluate");
  data::standardize_events(events, state.full, state.compact);
  return graph::build_graphs(events, state.spec, state.eta);
}

}  // namespace ptgnn::app
