#include "ptgnn/app/run_config.hpp"

#include <set>

#include "ptgnn/common/errors.hpp"

namespace ptgnn::app {

std::string_view to_string(IqrMode mode) {
  switch (mode) {
    case IqrMode::Auto: return "auto";
    case IqrMode::On: return "on";
    case IqrMode::Off: return "off";
  }
  return "?";
}

IqrMode parse_iqr_mode(std::string_view name) {
  for (auto m : {IqrMode::Auto, IqrMode::On, IqrMode::Off}) {
    if (name == to_string(m)) return m;
  }
  throw UsageError("unknown data.iqr_filter '" + std::string(name) + "' (valid: auto, on, off)");
}

bool DataConfig::iqr_enabled(graph::GraphMethod method) const {
  switch (iqr) {
    case IqrMode::On: return true;
    case IqrMode::Off: return false;
    case IqrMode::Auto:
      return method == graph::GraphMethod::BendingCentric || method == graph::GraphMethod::EtaCentric;
  }
  return false;
}

KeyValueDoc to_doc(const RunConfig& c) {
  KeyValueDoc doc;
  doc.set("data.path", c.data.path.string());
  doc.set("data.schema", c.data.schema.string());
  doc.set("data.iqr_filter", std::string(to_string(c.data.iqr)));
  doc.set("data.train_fraction", c.data.train_fraction);
  nn::write_model_config(doc, c.model);
  train::write_train_config(doc, c.train);
  return doc;
}

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    const KeyValueDoc defaults = to_doc(RunConfig{});
    for (const auto& [key, value] : defaults.entries()) k.insert(key);
    return k;
  }();
  return keys;
}

std::filesystem::path resolve(const std::string& value, const std::filesystem::path& base_dir) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p;
}

}  // namespace

RunConfig run_config_from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : doc.entries()) {
    if (!known_keys().count(key)) throw UsageError("unknown config key '" + key + "'");
  }
  RunConfig c;
  try {
    c.data.path = resolve(doc.get_or("data.path", ""), base_dir);
    c.data.schema = resolve(doc.get_or("data.schema", ""), base_dir);
    if (doc.contains("data.iqr_filter")) c.data.iqr = parse_iqr_mode(doc.get("data.iqr_filter"));
    if (doc.contains("data.train_fraction")) c.data.train_fraction = doc.get_double("data.train_fraction");
    c.model = nn::read_model_config(doc);
    c.train = train::read_train_config(doc);
  } catch (const DataError& e) {
    // Malformed numbers in a config file are usage problems, not data problems.
    throw UsageError(std::string("config: ") + e.what());
  }
  if (!(c.data.train_fraction > 0.0 && c.data.train_fraction < 1.0)) {
    throw UsageError("data.train_fraction must be in (0, 1)");
  }
  return c;
}

void apply_overrides(KeyValueDoc& doc, std::span<const std::string> overrides) {
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("override '" + item + "' is not key=value");
    const std::string key = trim(std::string_view(item).substr(0, eq));
    const std::string value = trim(std::string_view(item).substr(eq + 1));
    if (!known_keys().count(key)) throw UsageError("unknown config key '" + key + "'");
    doc.set(key, value);
  }
}

RunConfig load_run_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  KeyValueDoc doc;
  std::filesystem::path base;
  if (!path.empty()) {
    if (!std::filesystem::exists(path)) throw UsageError("config file not found: " + path.string());
    doc = KeyValueDoc::load(path);
    base = path.parent_path();
  }
  apply_overrides(doc, overrides);
  return run_config_from_doc(doc, base);
}

}  // namespace ptgnn::app
