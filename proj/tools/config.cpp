#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "geovote/error.hpp"

namespace geovote::cli {

using nlohmann::json;

namespace {

void reject_unknown(const json& node, const std::string& where, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

const json& require(const json& node, const std::string& key, const std::string& where) {
  if (!node.contains(key)) throw ConfigError("missing required key '" + where + key + "'");
  return node.at(key);
}

std::uint64_t as_u64(const json& v, const std::string& name) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError("key '" + name + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_double(const json& v, const std::string& name) {
  if (!v.is_number()) throw ConfigError("key '" + name + "' must be a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& name) {
  if (!v.is_string()) throw ConfigError("key '" + name + "' must be a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& name) {
  if (!v.is_boolean()) throw ConfigError("key '" + name + "' must be true or false");
  return v.get<bool>();
}

template <typename F>
void optional_key(const json& node, const std::string& key, const std::string& where, F&& apply) {
  if (node.contains(key)) apply(node.at(key), where + key);
}

/// Wraps enum parsers so their errors name the key.
template <typename F>
auto named(const std::string& name, F&& parse) -> decltype(parse()) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    throw ConfigError("key '" + name + "': " + e.what());
  }
}

HoeffdingTreeOptions parse_tree(const json& node, const std::string& where) {
  if (!node.is_object()) throw ConfigError("key '" + where + "' must be an object");
  reject_unknown(node, where + ".", {"split_confidence", "tie_threshold", "grace_period", "n_bins"});
  HoeffdingTreeOptions t;
  const std::string w = where + ".";
  optional_key(node, "split_confidence", w, [&](const json& v, const std::string& n) { t.split_confidence = as_double(v, n); });
  optional_key(node, "tie_threshold", w, [&](const json& v, const std::string& n) { t.tie_threshold = as_double(v, n); });
  optional_key(node, "grace_period", w, [&](const json& v, const std::string& n) { t.grace_period = as_u64(v, n); });
  optional_key(node, "n_bins", w, [&](const json& v, const std::string& n) { t.n_bins = as_u64(v, n); });
  return t;
}

}  // namespace

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::filesystem::path default_out_dir() {
  if (const char* env = std::getenv("GEOVOTE_OUT"); env && *env) return env;
  return "geovote-out";
}

StreamSpec parse_stream_spec(const json& node, std::uint64_t master_seed, const std::filesystem::path& base_dir) {
  if (!node.is_object()) throw ConfigError("key 'stream' must be an object");
  reject_unknown(node, "stream.",
                 {"kind", "seed", "n_features", "n_classes", "noise_percent", "n_centroids", "drift_speed",
                  "direction_flip_probability", "n_drifts", "drift_interval", "csv"});
  const std::string w = "stream.";
  StreamSpec spec;
  spec.kind = named("stream.kind", [&] { return parse_stream_kind(as_string(require(node, "kind", w), "stream.kind")); });
  spec.seed = mix64(master_seed ^ 0x5EED5EED5EED5EEDULL);
  if (spec.kind == StreamKind::sea) spec.n_features = 3;
  optional_key(node, "seed", w, [&](const json& v, const std::string& n) { spec.seed = as_u64(v, n); });
  optional_key(node, "n_features", w, [&](const json& v, const std::string& n) { spec.n_features = as_u64(v, n); });
  optional_key(node, "n_classes", w, [&](const json& v, const std::string& n) { spec.n_classes = as_u64(v, n); });
  optional_key(node, "noise_percent", w, [&](const json& v, const std::string& n) { spec.noise_percent = as_double(v, n); });
  optional_key(node, "n_centroids", w, [&](const json& v, const std::string& n) { spec.n_centroids = as_u64(v, n); });
  optional_key(node, "drift_speed", w, [&](const json& v, const std::string& n) { spec.drift_speed = as_double(v, n); });
  optional_key(node, "direction_flip_probability", w,
               [&](const json& v, const std::string& n) { spec.direction_flip_probability = as_double(v, n); });
  optional_key(node, "n_drifts", w, [&](const json& v, const std::string& n) { spec.n_drifts = as_u64(v, n); });
  optional_key(node, "drift_interval", w, [&](const json& v, const std::string& n) { spec.drift_interval = as_u64(v, n); });

  if (spec.kind == StreamKind::csv) {
    const json& c = require(node, "csv", w);
    if (!c.is_object()) throw ConfigError("key 'stream.csv' must be an object");
    reject_unknown(c, "stream.csv.", {"path", "feature_columns", "label_column", "labels", "header"});
    CsvSchema schema;
    schema.path = as_string(require(c, "path", "stream.csv."), "stream.csv.path");
    if (schema.path.is_relative()) schema.path = base_dir / schema.path;
    if (!std::filesystem::exists(schema.path)) {
      throw ConfigError("key 'stream.csv.path': file " + schema.path.string() + " does not exist");
    }
    const json& cols = require(c, "feature_columns", "stream.csv.");
    if (!cols.is_array()) throw ConfigError("key 'stream.csv.feature_columns' must be an array");
    for (const auto& col : cols) schema.feature_columns.push_back(as_u64(col, "stream.csv.feature_columns"));
    schema.label_column = as_u64(require(c, "label_column", "stream.csv."), "stream.csv.label_column");
    const json& labels = require(c, "labels", "stream.csv.");
    if (!labels.is_object()) throw ConfigError("key 'stream.csv.labels' must be an object");
    for (const auto& [text, index] : labels.items()) schema.labels[text] = as_u64(index, "stream.csv.labels." + text);
    optional_key(c, "header", "stream.csv.", [&](const json& v, const std::string& n) { schema.header = as_bool(v, n); });
    spec.n_features = schema.feature_columns.size();
    spec.n_classes = schema.n_classes();
    spec.csv = std::move(schema);
  }
  named("stream", [&] {
    spec.validate();
    return 0;
  });
  return spec;
}

RunConfig parse_run_config(json doc, const Overrides& overrides, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (overrides.seed) doc["seed"] = *overrides.seed;
  if (overrides.limit) doc["limit"] = *overrides.limit;
  if (overrides.out) doc["out"] = *overrides.out;
  if (overrides.jobs) doc["jobs"] = *overrides.jobs;

  reject_unknown(doc, "",
                 {"seed", "dataset", "stream", "ensemble", "sizes", "aggregations", "limit", "checkpoint_interval",
                  "out", "jobs", "scenario", "m", "pool_size"});
  RunConfig cfg;
  cfg.seed = as_u64(require(doc, "seed", ""), "seed");
  cfg.stream = parse_stream_spec(require(doc, "stream", ""), cfg.seed, base_dir);
  cfg.dataset = std::string(to_string(cfg.stream.kind)) + "-C" + std::to_string(cfg.stream.n_classes);
  optional_key(doc, "dataset", "", [&](const json& v, const std::string& n) { cfg.dataset = as_string(v, n); });

  // Ensemble defaults for size sweeps.
  cfg.ensemble.bagging_lambda = 6.0;
  cfg.ensemble.window_length = 500;
  cfg.ensemble.weight_mode = WeightMode::simplex;
  cfg.ensemble.seed = cfg.seed;
  if (doc.contains("ensemble")) {
    const json& e = doc.at("ensemble");
    if (!e.is_object()) throw ConfigError("key 'ensemble' must be an object");
    reject_unknown(e, "ensemble.",
                   {"bagging_lambda", "window_length", "weight_mode", "refresh_period", "base_learner", "tree"});
    const std::string w = "ensemble.";
    optional_key(e, "bagging_lambda", w, [&](const json& v, const std::string& n) { cfg.ensemble.bagging_lambda = as_double(v, n); });
    optional_key(e, "window_length", w, [&](const json& v, const std::string& n) { cfg.ensemble.window_length = as_u64(v, n); });
    optional_key(e, "refresh_period", w, [&](const json& v, const std::string& n) { cfg.ensemble.refresh_period = as_u64(v, n); });
    optional_key(e, "weight_mode", w, [&](const json& v, const std::string& n) {
      const auto s = as_string(v, n);
      if (s == "raw") {
        cfg.ensemble.weight_mode = WeightMode::raw;
      } else if (s == "simplex") {
        cfg.ensemble.weight_mode = WeightMode::simplex;
      } else {
        throw ConfigError("key '" + n + "' must be \"raw\" or \"simplex\"");
      }
    });
    optional_key(e, "base_learner", w, [&](const json& v, const std::string& n) {
      cfg.ensemble.base_learner = named(n, [&] { return parse_learner_kind(as_string(v, n)); });
    });
    optional_key(e, "tree", w, [&](const json& v, const std::string& n) { cfg.ensemble.tree_options = parse_tree(v, n); });
  }

  optional_key(doc, "sizes", "", [&](const json& v, const std::string& n) {
    if (!v.is_array() || v.empty()) throw ConfigError("key 'sizes' must be a non-empty array");
    for (const auto& s : v) {
      const auto m = as_u64(s, n);
      if (m < 2) throw ConfigError("key 'sizes': every size must be >= 2");
      cfg.sizes.push_back(m);
    }
  });
  cfg.aggregations = {Aggregation::mv, Aggregation::wmv};
  optional_key(doc, "aggregations", "", [&](const json& v, const std::string& n) {
    if (!v.is_array() || v.empty()) throw ConfigError("key 'aggregations' must be a non-empty array");
    cfg.aggregations.clear();
    for (const auto& a : v) cfg.aggregations.push_back(named(n, [&] { return parse_aggregation(as_string(a, n)); }));
  });

  cfg.evaluation.limit = 100'000;
  optional_key(doc, "limit", "", [&](const json& v, const std::string& n) { cfg.evaluation.limit = as_u64(v, n); });
  optional_key(doc, "checkpoint_interval", "",
               [&](const json& v, const std::string& n) { cfg.evaluation.checkpoint_interval = as_u64(v, n); });
  if (cfg.evaluation.checkpoint_interval == 0) throw ConfigError("key 'checkpoint_interval' must be >= 1");
  if (cfg.evaluation.limit == 0 && cfg.stream.kind != StreamKind::csv) {
    throw ConfigError("key 'limit' must be >= 1 for generated streams");
  }

  cfg.out_dir = default_out_dir();
  optional_key(doc, "out", "", [&](const json& v, const std::string& n) { cfg.out_dir = as_string(v, n); });
  optional_key(doc, "jobs", "", [&](const json& v, const std::string& n) {
    cfg.jobs = static_cast<unsigned>(as_u64(v, n));
    if (cfg.jobs == 0) throw ConfigError("key 'jobs' must be >= 1");
  });

  optional_key(doc, "scenario", "", [&](const json& v, const std::string& n) {
    cfg.scenario = named(n, [&] { return parse_scenario(as_string(v, n)); });
  });
  auto& sp = cfg.scenario_params;
  sp.seed = cfg.seed;
  sp.tree_options = cfg.ensemble.tree_options;
  sp.weight_mode = cfg.ensemble.weight_mode;
  sp.refresh_period = cfg.ensemble.refresh_period;
  if (doc.contains("ensemble")) {
    const json& e = doc.at("ensemble");
    if (e.contains("bagging_lambda")) sp.bagging_lambda = cfg.ensemble.bagging_lambda;
    if (e.contains("window_length")) sp.window_length = cfg.ensemble.window_length;
  }
  optional_key(doc, "m", "", [&](const json& v, const std::string& n) {
    sp.m = as_u64(v, n);
    if (sp.m < 2) throw ConfigError("key 'm' must be >= 2");
  });
  optional_key(doc, "pool_size", "", [&](const json& v, const std::string& n) {
    sp.pool_size = as_u64(v, n);
    if (sp.pool_size < 2) throw ConfigError("key 'pool_size' must be >= 2");
  });
  return cfg;
}

}  // namespace geovote::cli
