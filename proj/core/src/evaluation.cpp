#include "geovote/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <numeric>
#include <thread>

#include "geovote/error.hpp"
#include "geovote/stats.hpp"

namespace geovote {

PrequentialResult prequential_run(Stream& stream, OnlineClassifier& model, const PrequentialOptions& options) {
  if (options.checkpoint_interval == 0) throw ConfigError("checkpoint_interval must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  PrequentialResult out;
  while (options.limit == 0 || out.instances_processed < options.limit) {
    auto record = stream.next();
    if (!record) break;
    if (model.predict(record->features) == record->label) ++out.correct;
    model.train_one(*record);
    ++out.instances_processed;
    if (out.instances_processed % options.checkpoint_interval == 0) {
      out.series.push_back({out.instances_processed, static_cast<double>(out.correct) / out.instances_processed});
    }
  }
  if (out.instances_processed == 0) throw EmptyStreamError("prequential run over an empty stream");
  out.final_accuracy = static_cast<double>(out.correct) / static_cast<double>(out.instances_processed);
  if (out.series.empty() || out.series.back().seen != out.instances_processed) {
    out.series.push_back({out.instances_processed, out.final_accuracy});
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------

void ResultMatrix::validate() const {
  if (values.size() != datasets.size()) throw ConfigError("result matrix: row count differs from dataset names");
  for (const auto& row : values) {
    if (row.size() != methods.size()) throw ConfigError("result matrix is not rectangular");
    for (double v : row) {
      if (!std::isfinite(v)) throw ConfigError("result matrix has a non-finite entry");
    }
  }
}

ResultMatrix ResultMatrix::read_csv(std::istream& in) {
  ResultMatrix out;
  std::string text;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.empty()) continue;
    const auto fields = split_csv_line(text);
    if (!have_header) {
      for (std::size_t i = 1; i < fields.size(); ++i) out.methods.emplace_back(fields[i]);
      have_header = true;
      continue;
    }
    if (fields.size() != out.methods.size() + 1) {
      throw ParseError("expected " + std::to_string(out.methods.size() + 1) + " fields", line);
    }
    out.datasets.emplace_back(fields[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const std::string cell(fields[i]);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = std::string::npos;
      }
      if (used != cell.size()) throw ParseError("bad number '" + cell + "'", line);
      row.push_back(v);
    }
    out.values.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("missing header row", line);
  out.validate();
  return out;
}

ResultMatrix ResultMatrix::read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_csv(in);
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

FriedmanResult friedman_test(const ResultMatrix& matrix, double alpha, std::optional<double> threshold_override) {
  matrix.validate();
  const std::size_t n = matrix.datasets.size();
  const std::size_t k = matrix.methods.size();
  if (k < 2 || n < 2) throw ConfigError("Friedman test needs at least 2 methods and 2 datasets");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

  const double N = static_cast<double>(n);
  const double K = static_cast<double>(k);
  std::vector<double> rank_sums(k, 0.0);
  double squared_ranks = 0.0;
  for (const auto& row : matrix.values) {
    const auto ranks = average_ranks(row);
    for (std::size_t j = 0; j < k; ++j) {
      rank_sums[j] += ranks[j];
      squared_ranks += ranks[j] * ranks[j];
    }
  }

  FriedmanResult out;
  out.mean_ranks.resize(k);
  double sum_sq_mean = 0.0;
  double sum_sq_sums = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out.mean_ranks[j] = rank_sums[j] / N;
    sum_sq_mean += out.mean_ranks[j] * out.mean_ranks[j];
    sum_sq_sums += rank_sums[j] * rank_sums[j];
  }
  out.chi_square = 12.0 * N / (K * (K + 1.0)) * (sum_sq_mean - K * (K + 1.0) * (K + 1.0) / 4.0);
  if (std::abs(out.chi_square) < 1e-12) out.chi_square = 0.0;
  out.df1 = K - 1.0;
  out.df2 = (K - 1.0) * (N - 1.0);
  const double denom = N * (K - 1.0) - out.chi_square;
  out.iman_davenport_f =
      denom > 0.0 ? (N - 1.0) * out.chi_square / denom : std::numeric_limits<double>::infinity();
  out.p_value = stats::f_distribution_sf(out.iman_davenport_f, out.df1, out.df2);
  out.rejects_null = out.p_value < alpha;

  if (threshold_override) {
    out.critical_difference = *threshold_override;
    out.critical_difference_overridden = true;
  } else {
    const double t = stats::student_t_upper_quantile(alpha / 2.0, out.df2);
    const double spread = std::max(0.0, N * squared_ranks - sum_sq_sums);
    out.critical_difference = t * std::sqrt(2.0 * spread / out.df2) / N;
  }
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      if (std::abs(out.mean_ranks[a] - out.mean_ranks[b]) > out.critical_difference) {
        out.significant_pairs.emplace_back(a, b);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> SweepResult::marker_size() const {
  for (std::size_t m : sizes) {
    if (m == n_classes) return m;
  }
  return std::nullopt;
}

namespace {

std::string method_name(Aggregation a, std::size_t m) {
  return std::string(a == Aggregation::mv ? "MV-" : "WMV-") + std::to_string(m);
}

}  // namespace

SweepResult size_sweep(const SweepConfig& config) {
  if (config.sizes.empty()) throw ConfigError("sweep needs at least one ensemble size");
  if (config.aggregations.empty()) throw ConfigError("sweep needs at least one aggregation");
  config.stream.validate();

  struct Job {
    std::size_t m;
    Aggregation aggregation;
  };
  std::vector<Job> jobs;
  for (std::size_t m : config.sizes) {
    for (Aggregation a : config.aggregations) jobs.push_back({m, a});
  }

  SweepResult out;
  out.dataset = config.dataset;
  out.sizes = config.sizes;
  out.n_classes = make_stream(config.stream)->n_classes();
  out.runs.resize(jobs.size());

  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      try {
        auto stream = make_stream(config.stream);
        EnsembleConfig ec = config.ensemble;
        ec.size = jobs[i].m;
        ec.aggregation = jobs[i].aggregation;
        ec.run_id = jobs[i].m;
        Ensemble ensemble(ec, stream->n_features(), stream->n_classes());
        RunResult& run = out.runs[i];
        run.dataset = config.dataset;
        run.method = method_name(jobs[i].aggregation, jobs[i].m);
        run.m = jobs[i].m;
        run.aggregation = jobs[i].aggregation;
        run.result = prequential_run(*stream, ensemble, config.evaluation);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  out.matrix.datasets = {config.dataset};
  out.matrix.values.emplace_back();
  for (const auto& run : out.runs) {
    out.matrix.methods.push_back(run.method);
    out.matrix.values.front().push_back(run.result.final_accuracy);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string safe_file_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    out.push_back(ok ? c : '_');
  }
  return out.empty() ? "stream" : out;
}

}  // namespace

void write_summary_csv(std::span<const RunResult> runs, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "dataset,method,m,aggregation,final_accuracy\n";
  for (const auto& r : runs) {
    out << r.dataset << ',' << r.method << ',' << r.m << ',' << to_string(r.aggregation) << ','
        << format_fixed(r.result.final_accuracy) << '\n';
  }
  finish(out, path);
}

void write_series_csv(std::span<const RunResult> runs, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << "dataset,method,m,aggregation,instances,accuracy\n";
  for (const auto& r : runs) {
    for (const auto& c : r.result.series) {
      out << r.dataset << ',' << r.method << ',' << r.m << ',' << to_string(r.aggregation) << ',' << c.seen << ','
          << format_fixed(c.accuracy) << '\n';
    }
  }
  finish(out, path);
}

void emit_report(const SweepResult& sweep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  write_summary_csv(sweep.runs, dir / "summary.csv");
  write_series_csv(sweep.runs, dir / "series.csv");

  const auto plot_path = dir / ("plot_" + safe_file_stem(sweep.dataset) + ".csv");
  auto out = open_for_write(plot_path);
  out << "m,mv_accuracy,wmv_accuracy,m_equals_p\n";
  for (std::size_t m : sweep.sizes) {
    std::string mv, wmv;
    for (const auto& r : sweep.runs) {
      if (r.m != m) continue;
      (r.aggregation == Aggregation::mv ? mv : wmv) = format_fixed(r.result.final_accuracy);
    }
    out << m << ',' << mv << ',' << wmv << ',' << (m == sweep.n_classes ? 1 : 0) << '\n';
  }
  finish(out, plot_path);
}

}  // namespace geovote
