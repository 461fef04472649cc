#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geovote/record.hpp"
#include "geovote/rng.hpp"

namespace geovote {

enum class StreamKind { rbf, sea, hyperplane, csv };

std::string_view to_string(StreamKind kind) noexcept;
StreamKind parse_stream_kind(std::string_view name);

struct CsvSchema {
  std::filesystem::path path;
  std::vector<std::size_t> feature_columns;  ///< 0-based column indices
  std::size_t label_column = 0;
  std::map<std::string, std::size_t> labels;  ///< label text -> dense index
  bool header = false;

  std::size_t n_classes() const;
};

/// Everything needed to regenerate a stream bit-for-bit.
struct StreamSpec {
  StreamKind kind = StreamKind::rbf;
  std::uint64_t seed = 1;
  std::size_t n_features = 10;
  std::size_t n_classes = 2;
  double noise_percent = 0.0;

  // rbf
  std::size_t n_centroids = 50;
  double drift_speed = 0.0;  ///< rbf: centroid displacement per instance; hyperplane: DS

  // hyperplane
  double direction_flip_probability = 0.1;

  // sea
  std::size_t n_drifts = 3;
  std::uint64_t drift_interval = 250'000;  ///< instances per concept

  std::optional<CsvSchema> csv;

  /// Throws ConfigError on out-of-range parameters.
  void validate() const;
  /// Deterministic 64-bit digest of the canonical parameter text.
  std::uint64_t fingerprint() const;
};

class Stream {
 public:
  virtual ~Stream() = default;

  /// Next record, or nullopt once a finite stream is exhausted.
  virtual std::optional<StreamRecord> next() = 0;
  virtual std::size_t n_features() const noexcept = 0;
  virtual std::size_t n_classes() const noexcept = 0;
};

/// Random radial-basis-function generator with optional centroid drift.
///
/// Centroids get uniform centres in [0,1]^d, a uniform standard deviation
/// and a uniform sampling weight. Class labels are assigned round-robin and
/// then shuffled so every class owns at least one centroid whenever
/// n_centroids >= n_classes. A sample picks a centroid by weight and offsets
/// its centre along a random unit direction by N(0,1) * stddev. With a
/// nonzero drift speed every centre moves that distance along its own unit
/// direction per instance, reflecting off the faces of the unit cube.
class RbfGenerator final : public Stream {
 public:
  struct Centroid {
    std::vector<double> centre;
    std::vector<double> direction;
    std::size_t label = 0;
    double stddev = 0.0;
    double weight = 0.0;
  };

  explicit RbfGenerator(const StreamSpec& spec);

  std::optional<StreamRecord> next() override;
  std::size_t n_features() const noexcept override { return n_features_; }
  std::size_t n_classes() const noexcept override { return n_classes_; }

  const std::vector<Centroid>& centroids() const noexcept { return centroids_; }

 private:
  void drift();

  std::size_t n_features_;
  std::size_t n_classes_;
  double drift_speed_;
  double noise_;
  Rng model_rng_;
  Rng sample_rng_;
  std::vector<Centroid> centroids_;
  std::vector<double> cumulative_weight_;
  std::uint64_t seq_ = 0;
};

/// SEA concepts: three uniform features in [0,10], class 0 iff f1 + f2 <= theta.
/// theta cycles through {8, 9, 7, 9.5}; an abrupt drift happens every
/// drift_interval instances until n_drifts drifts have occurred. Labels are
/// flipped with probability noise_percent / 100.
class SeaGenerator final : public Stream {
 public:
  static constexpr double kThresholds[4] = {8.0, 9.0, 7.0, 9.5};

  explicit SeaGenerator(const StreamSpec& spec);

  std::optional<StreamRecord> next() override;
  std::size_t n_features() const noexcept override { return 3; }
  std::size_t n_classes() const noexcept override { return 2; }

  static std::size_t classify(double f1, double f2, double theta) noexcept { return f1 + f2 <= theta ? 0 : 1; }

  double threshold() const noexcept;
  std::size_t drifts_so_far() const noexcept { return concept_; }

 private:
  std::size_t n_drifts_;
  std::uint64_t drift_interval_;
  double noise_;
  Rng rng_;
  std::size_t concept_ = 0;
  std::uint64_t seq_ = 0;
};

/// Rotating hyperplane: features uniform in [0,1]^d, class 1 iff
/// sum w_i x_i >= 0.5 * sum w_i. After each instance every weight moves by
/// drift_speed * 0.001 * direction_i, and each direction flips sign with
/// probability direction_flip_probability.
class HyperplaneGenerator final : public Stream {
 public:
  explicit HyperplaneGenerator(const StreamSpec& spec);

  std::optional<StreamRecord> next() override;
  std::size_t n_features() const noexcept override { return n_features_; }
  std::size_t n_classes() const noexcept override { return 2; }

  static std::size_t classify(std::span<const double> features, std::span<const double> weights) noexcept;

  std::span<const double> weights() const noexcept { return weights_; }

 private:
  std::size_t n_features_;
  double magnitude_;
  double flip_probability_;
  double noise_;
  Rng rng_;
  std::vector<double> weights_;
  std::vector<double> directions_;
  std::uint64_t seq_ = 0;
};

/// Records from a CSV file, in file order.
class CsvStream final : public Stream {
 public:
  explicit CsvStream(CsvSchema schema);

  std::optional<StreamRecord> next() override;
  std::size_t n_features() const noexcept override { return schema_.feature_columns.size(); }
  std::size_t n_classes() const noexcept override { return n_classes_; }

 private:
  CsvSchema schema_;
  std::ifstream in_;
  std::size_t n_classes_;
  std::size_t line_ = 0;
  std::uint64_t seq_ = 0;
};

std::unique_ptr<Stream> make_stream(const StreamSpec& spec);

/// Splits one CSV line on commas. No quoting support.
std::vector<std::string_view> split_csv_line(std::string_view line);

/// Writes records as CSV with columns x0..x{d-1},label and a header row.
void write_csv(std::ostream& out, std::size_t n_features, std::span<const StreamRecord> records);

}  // namespace geovote
