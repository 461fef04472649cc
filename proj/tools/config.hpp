#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "geovote/ensemble.hpp"
#include "geovote/evaluation.hpp"
#include "geovote/streams.hpp"
#include "json.hpp"

namespace geovote::cli {

/// Top-level keys that command-line flags may override.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> limit;
  std::optional<std::string> out;
  std::optional<unsigned> jobs;
};

/// A parsed run configuration. Every command reads one JSON document;
/// unknown keys are rejected and errors name the offending key.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string dataset;
  StreamSpec stream;
  EnsembleConfig ensemble;
  PrequentialOptions evaluation;
  std::vector<std::size_t> sizes;
  std::vector<Aggregation> aggregations;
  std::optional<Scenario> scenario;
  ScenarioParams scenario_params;
  std::filesystem::path out_dir;
  unsigned jobs = 1;
};

nlohmann::json load_json(const std::filesystem::path& path);

/// `base_dir` resolves relative CSV paths. Throws ConfigError.
RunConfig parse_run_config(nlohmann::json doc, const Overrides& overrides, const std::filesystem::path& base_dir);

StreamSpec parse_stream_spec(const nlohmann::json& node, std::uint64_t master_seed,
                             const std::filesystem::path& base_dir);

/// Default output directory: $GEOVOTE_OUT, else "geovote-out".
std::filesystem::path default_out_dir();

}  // namespace geovote::cli
