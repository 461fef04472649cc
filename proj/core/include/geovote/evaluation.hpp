#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geovote/ensemble.hpp"
#include "geovote/streams.hpp"

namespace geovote {

struct PrequentialOptions {
  std::size_t limit = 0;  ///< 0 runs until the stream ends
  std::size_t checkpoint_interval = 1000;
};

struct Checkpoint {
  std::size_t seen = 0;
  double accuracy = 0.0;
};

struct PrequentialResult {
  std::vector<Checkpoint> series;
  double final_accuracy = 0.0;
  std::size_t instances_processed = 0;
  std::size_t correct = 0;
  double wall_seconds = 0.0;
};

/// Interleaved test-then-train: every record is predicted before it is
/// trained on. Cumulative accuracy is recorded every checkpoint_interval
/// records and after the last one. Throws EmptyStreamError if the stream
/// yields nothing.
PrequentialResult prequential_run(Stream& stream, OnlineClassifier& model, const PrequentialOptions& options);

/// Datasets x methods table of accuracies (percent or fraction).
struct ResultMatrix {
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::vector<std::vector<double>> values;  ///< values[dataset][method]

  /// Throws ConfigError unless rectangular and finite.
  void validate() const;

  /// First column holds dataset names; the header row holds method names
  /// (its first cell is ignored).
  static ResultMatrix read_csv(std::istream& in);
  static ResultMatrix read_csv(const std::filesystem::path& path);
};

/// Ranks in ascending order of value (rank 1 = smallest); ties share the
/// average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

struct FriedmanResult {
  std::vector<double> mean_ranks;  ///< higher is better
  double chi_square = 0.0;
  double iman_davenport_f = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
  double p_value = 1.0;
  bool rejects_null = false;
  /// Minimum mean-rank difference for a significant pairwise comparison.
  double critical_difference = 0.0;
  bool critical_difference_overridden = false;
  /// Method index pairs (i < j) whose mean ranks differ by more than the
  /// critical difference.
  std::vector<std::pair<std::size_t, std::size_t>> significant_pairs;
};

/// Friedman test with the Iman-Davenport F correction.
///
/// The pairwise threshold is Conover's post-hoc difference for mean ranks:
///   t(1 - alpha/2, (N-1)(k-1)) * sqrt(2 (N A - sum_j R_j^2) / ((N-1)(k-1))) / N
/// with A the sum of squared ranks and R_j the rank sum of method j. A
/// caller-supplied threshold replaces it when given.
FriedmanResult friedman_test(const ResultMatrix& matrix, double alpha = 0.05,
                             std::optional<double> threshold_override = std::nullopt);

struct SweepConfig {
  std::string dataset = "stream";
  StreamSpec stream;
  std::vector<std::size_t> sizes;
  std::vector<Aggregation> aggregations{Aggregation::mv, Aggregation::wmv};
  /// Template for every run; size, aggregation and run_id are overwritten.
  EnsembleConfig ensemble;
  PrequentialOptions evaluation;
  unsigned jobs = 1;
};

struct RunResult {
  std::string dataset;
  std::string method;
  std::size_t m = 0;
  Aggregation aggregation = Aggregation::mv;
  PrequentialResult result;
};

struct SweepResult {
  std::string dataset;
  std::size_t n_classes = 0;
  std::vector<std::size_t> sizes;
  std::vector<RunResult> runs;  ///< ordered by (size, aggregation) as configured
  ResultMatrix matrix;          ///< one row (the dataset), one column per run

  /// The swept size equal to the number of classes, if any.
  std::optional<std::size_t> marker_size() const;
};

/// Runs one prequential evaluation per (size, aggregation), regenerating the
/// stream from the same spec for every run. Runs with the same size share
/// their PRNG streams, so mv and wmv differ only in aggregation. Up to
/// `jobs` runs execute concurrently; output order is independent of it.
SweepResult size_sweep(const SweepConfig& config);

/// Writes summary.csv, series.csv and plot_<dataset>.csv under `dir`.
/// Throws IoError naming the path on failure.
void emit_report(const SweepResult& sweep, const std::filesystem::path& dir);

void write_summary_csv(std::span<const RunResult> runs, const std::filesystem::path& path);
void write_series_csv(std::span<const RunResult> runs, const std::filesystem::path& path);

/// Fixed 6-decimal rendering used by every report file.
std::string format_fixed(double value, int decimals = 6);

}  // namespace geovote
