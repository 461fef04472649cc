#include "geovote/streams.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "geovote/error.hpp"

namespace geovote {

std::string_view to_string(StreamKind kind) noexcept {
  switch (kind) {
    case StreamKind::rbf:
      return "rbf";
    case StreamKind::sea:
      return "sea";
    case StreamKind::hyperplane:
      return "hyperplane";
    case StreamKind::csv:
      return "csv";
  }
  return "?";
}

StreamKind parse_stream_kind(std::string_view name) {
  if (name == "rbf") return StreamKind::rbf;
  if (name == "sea") return StreamKind::sea;
  if (name == "hyperplane" || name == "hyp") return StreamKind::hyperplane;
  if (name == "csv") return StreamKind::csv;
  throw ConfigError("unknown stream kind '" + std::string(name) + "'");
}

std::size_t CsvSchema::n_classes() const {
  std::size_t p = 0;
  for (const auto& [text, index] : labels) p = std::max(p, index + 1);
  return p;
}

void StreamSpec::validate() const {
  if (noise_percent < 0.0 || noise_percent > 100.0) throw ConfigError("noise_percent must lie in [0, 100]");
  switch (kind) {
    case StreamKind::rbf:
      if (n_classes < 2) throw ConfigError("n_classes must be >= 2");
      if (n_features == 0) throw ConfigError("n_features must be >= 1");
      if (n_centroids == 0) throw ConfigError("n_centroids must be >= 1");
      if (drift_speed < 0.0) throw ConfigError("drift_speed must be >= 0");
      break;
    case StreamKind::sea:
      if (n_classes != 2) throw ConfigError("sea streams have exactly 2 classes");
      if (drift_interval == 0) throw ConfigError("drift_interval must be >= 1");
      break;
    case StreamKind::hyperplane:
      if (n_classes != 2) throw ConfigError("hyperplane streams have exactly 2 classes");
      if (n_features == 0) throw ConfigError("n_features must be >= 1");
      if (direction_flip_probability < 0.0 || direction_flip_probability > 1.0) {
        throw ConfigError("direction_flip_probability must lie in [0, 1]");
      }
      break;
    case StreamKind::csv:
      if (!csv) throw ConfigError("csv stream needs a schema");
      if (csv->feature_columns.empty()) throw ConfigError("csv schema needs at least one feature column");
      if (csv->n_classes() < 2) throw ConfigError("csv label dictionary needs at least 2 classes");
      break;
  }
}

std::uint64_t StreamSpec::fingerprint() const {
  std::ostringstream text;
  text << std::setprecision(17) << "kind=" << to_string(kind) << ";seed=" << seed << ";features=" << n_features
       << ";classes=" << n_classes << ";noise=" << noise_percent;
  switch (kind) {
    case StreamKind::rbf:
      text << ";centroids=" << n_centroids << ";ds=" << drift_speed;
      break;
    case StreamKind::sea:
      text << ";drifts=" << n_drifts << ";interval=" << drift_interval;
      break;
    case StreamKind::hyperplane:
      text << ";ds=" << drift_speed << ";flip=" << direction_flip_probability;
      break;
    case StreamKind::csv:
      text << ";path=" << csv->path.generic_string() << ";label=" << csv->label_column << ";header=" << csv->header;
      for (auto c : csv->feature_columns) text << ",f" << c;
      for (const auto& [k, v] : csv->labels) text << "," << k << ":" << v;
      break;
  }
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

bool flip(Rng& rng, double noise_percent) { return noise_percent > 0.0 && rng.uniform() * 100.0 < noise_percent; }

void random_unit(Rng& rng, std::vector<double>& out) {
  for (;;) {
    double norm2 = 0.0;
    for (double& v : out) {
      v = rng.normal();
      norm2 += v * v;
    }
    if (norm2 > 0.0) {
      const double inv = 1.0 / std::sqrt(norm2);
      for (double& v : out) v *= inv;
      return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

RbfGenerator::RbfGenerator(const StreamSpec& spec)
    : n_features_(spec.n_features),
      n_classes_(spec.n_classes),
      drift_speed_(spec.drift_speed),
      noise_(spec.noise_percent),
      model_rng_(Rng(spec.seed).split(0)),
      sample_rng_(Rng(spec.seed).split(1)) {
  spec.validate();
  centroids_.resize(spec.n_centroids);
  std::vector<std::size_t> labels(spec.n_centroids);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % n_classes_;
  for (std::size_t i = labels.size(); i > 1; --i) {
    std::swap(labels[i - 1], labels[model_rng_.below(i)]);
  }
  double running = 0.0;
  for (std::size_t i = 0; i < centroids_.size(); ++i) {
    auto& c = centroids_[i];
    c.centre.resize(n_features_);
    for (double& x : c.centre) x = model_rng_.uniform();
    c.stddev = model_rng_.uniform();
    c.weight = model_rng_.uniform();
    c.label = labels[i];
    c.direction.resize(n_features_);
    random_unit(model_rng_, c.direction);
    running += c.weight;
    cumulative_weight_.push_back(running);
  }
}

std::optional<StreamRecord> RbfGenerator::next() {
  const double pick = sample_rng_.uniform() * cumulative_weight_.back();
  auto it = std::upper_bound(cumulative_weight_.begin(), cumulative_weight_.end(), pick);
  if (it == cumulative_weight_.end()) --it;
  const auto& c = centroids_[static_cast<std::size_t>(it - cumulative_weight_.begin())];

  StreamRecord record;
  record.seq = seq_++;
  record.features.resize(n_features_);
  random_unit(sample_rng_, record.features);
  const double magnitude = sample_rng_.normal() * c.stddev;
  for (std::size_t f = 0; f < n_features_; ++f) record.features[f] = c.centre[f] + record.features[f] * magnitude;
  record.label = c.label;
  if (flip(sample_rng_, noise_)) {
    record.label = (record.label + 1 + sample_rng_.below(n_classes_ - 1)) % n_classes_;
  }
  if (drift_speed_ > 0.0) drift();
  return record;
}

void RbfGenerator::drift() {
  for (auto& c : centroids_) {
    for (std::size_t f = 0; f < n_features_; ++f) {
      double& x = c.centre[f];
      x += c.direction[f] * drift_speed_;
      if (x < 0.0) {
        x = -x;
        c.direction[f] = -c.direction[f];
      } else if (x > 1.0) {
        x = 2.0 - x;
        c.direction[f] = -c.direction[f];
      }
    }
  }
}

// ---------------------------------------------------------------------------

SeaGenerator::SeaGenerator(const StreamSpec& spec)
    : n_drifts_(spec.n_drifts), drift_interval_(spec.drift_interval), noise_(spec.noise_percent), rng_(spec.seed) {
  spec.validate();
}

double SeaGenerator::threshold() const noexcept { return kThresholds[concept_ % 4]; }

std::optional<StreamRecord> SeaGenerator::next() {
  if (seq_ > 0 && seq_ % drift_interval_ == 0 && concept_ < n_drifts_) ++concept_;
  StreamRecord record;
  record.seq = seq_++;
  record.features = {rng_.uniform(0.0, 10.0), rng_.uniform(0.0, 10.0), rng_.uniform(0.0, 10.0)};
  record.label = classify(record.features[0], record.features[1], threshold());
  if (flip(rng_, noise_)) record.label = 1 - record.label;
  return record;
}

// ---------------------------------------------------------------------------

HyperplaneGenerator::HyperplaneGenerator(const StreamSpec& spec)
    : n_features_(spec.n_features),
      magnitude_(spec.drift_speed * 0.001),
      flip_probability_(spec.direction_flip_probability),
      noise_(spec.noise_percent),
      rng_(spec.seed),
      weights_(spec.n_features),
      directions_(spec.n_features, 1.0) {
  spec.validate();
  for (double& w : weights_) w = rng_.uniform();
}

std::size_t HyperplaneGenerator::classify(std::span<const double> features, std::span<const double> weights) noexcept {
  double dot = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    dot += weights[i] * features[i];
    total += weights[i];
  }
  return dot >= 0.5 * total ? 1 : 0;
}

std::optional<StreamRecord> HyperplaneGenerator::next() {
  StreamRecord record;
  record.seq = seq_++;
  record.features.resize(n_features_);
  for (double& x : record.features) x = rng_.uniform();
  record.label = classify(record.features, weights_);
  if (flip(rng_, noise_)) record.label = 1 - record.label;
  if (magnitude_ > 0.0) {
    for (std::size_t i = 0; i < n_features_; ++i) {
      weights_[i] += directions_[i] * magnitude_;
      if (rng_.uniform() < flip_probability_) directions_[i] = -directions_[i];
    }
  }
  return record;
}

// ---------------------------------------------------------------------------

std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

CsvStream::CsvStream(CsvSchema schema) : schema_(std::move(schema)), n_classes_(schema_.n_classes()) {
  in_.open(schema_.path);
  if (!in_) throw IoError("cannot open " + schema_.path.string());
  if (schema_.feature_columns.empty()) throw ConfigError("csv schema needs at least one feature column");
  if (schema_.header) {
    std::string discard;
    std::getline(in_, discard);
    ++line_;
  }
}

std::optional<StreamRecord> CsvStream::next() {
  std::string text;
  while (std::getline(in_, text)) {
    ++line_;
    const auto line = trim(text);
    if (line.empty()) continue;

    const auto fields = split_csv_line(line);
    StreamRecord record;
    record.seq = seq_;
    record.features.reserve(schema_.feature_columns.size());
    for (std::size_t column : schema_.feature_columns) {
      if (column >= fields.size()) throw ParseError("missing column " + std::to_string(column), line_);
      const auto field = trim(fields[column]);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError("bad number '" + std::string(field) + "' in column " + std::to_string(column), line_);
      }
      record.features.push_back(value);
    }
    if (schema_.label_column >= fields.size()) throw ParseError("missing label column", line_);
    const auto label = std::string(trim(fields[schema_.label_column]));
    const auto it = schema_.labels.find(label);
    if (it == schema_.labels.end()) {
      throw SchemaError("unknown label '" + label + "' at line " + std::to_string(line_));
    }
    record.label = it->second;
    ++seq_;
    return record;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Stream> make_stream(const StreamSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case StreamKind::rbf:
      return std::make_unique<RbfGenerator>(spec);
    case StreamKind::sea:
      return std::make_unique<SeaGenerator>(spec);
    case StreamKind::hyperplane:
      return std::make_unique<HyperplaneGenerator>(spec);
    case StreamKind::csv:
      return std::make_unique<CsvStream>(*spec.csv);
  }
  throw ConfigError("unknown stream kind");
}

void write_csv(std::ostream& out, std::size_t n_features, std::span<const StreamRecord> records) {
  for (std::size_t f = 0; f < n_features; ++f) out << 'x' << f << ',';
  out << "label\n";
  char buf[64];
  for (const auto& r : records) {
    for (double x : r.features) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << r.label << '\n';
  }
}

}  // namespace geovote
