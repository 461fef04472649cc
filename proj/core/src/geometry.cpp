#include "geovote/geometry.hpp"

#include <cmath>
#include <string>

#include "geovote/error.hpp"

namespace geovote {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace

ScoreVector::ScoreVector(std::vector<double> scores) : scores_(std::move(scores)) {
  if (scores_.size() < 2) {
    throw DimensionError("score vector needs at least 2 classes, got " + std::to_string(scores_.size()));
  }
  double sum = 0.0;
  for (double s : scores_) {
    if (!std::isfinite(s) || s < 0.0) throw NumericError("score vector entry is negative or non-finite");
    sum += s;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw NumericError("score vector sums to " + std::to_string(sum) + ", expected 1");
  }
}

ScoreVector ScoreVector::uniform(std::size_t p) {
  return ScoreVector(std::vector<double>(p, 1.0 / static_cast<double>(p)));
}

IdealPoint::IdealPoint(std::size_t p, std::size_t label_index) : point_(p, 0.0), label_(label_index) {
  if (p < 2) throw DimensionError("ideal point needs at least 2 classes");
  if (label_index >= p) {
    throw DimensionError("label index " + std::to_string(label_index) + " out of range for p=" + std::to_string(p));
  }
  point_[label_index] = 1.0;
}

ScorePolytope::ScorePolytope(std::vector<ScoreVector> rows, IdealPoint ideal)
    : rows_(std::move(rows)), ideal_(std::move(ideal)) {
  for (const auto& row : rows_) {
    if (row.size() != ideal_.size()) throw DimensionError("polytope row length differs from ideal point");
  }
}

WeightVector::WeightVector(std::vector<double> weights, WeightMode mode) : weights_(std::move(weights)), mode_(mode) {
  require_finite(weights_, "weight vector");
  if (mode_ == WeightMode::simplex) {
    double sum = 0.0;
    for (double w : weights_) {
      if (w < 0.0) throw NumericError("simplex weight vector has a negative entry");
      sum += w;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) throw NumericError("simplex weight vector does not sum to 1");
  }
}

WeightVector WeightVector::uniform(std::size_t m) {
  if (m == 0) throw EmptyEnsembleError("uniform weights for an empty ensemble");
  return WeightVector(std::vector<double>(m, 1.0 / static_cast<double>(m)), WeightMode::simplex);
}

double loss(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("loss: length " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::vector<double> centroid(std::span<const ScoreVector> rows) {
  if (rows.empty()) throw EmptyEnsembleError("centroid of an empty polytope");
  const std::size_t p = rows.front().size();
  std::vector<double> out(p, 0.0);
  for (const auto& row : rows) {
    if (row.size() != p) throw DimensionError("centroid: ragged polytope");
    for (std::size_t k = 0; k < p; ++k) out[k] += row[k];
  }
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  for (double& v : out) v *= inv_m;
  return out;
}

std::vector<double> centroid(const ScorePolytope& poly) { return centroid(poly.rows()); }

std::vector<double> weighted_centroid(std::span<const ScoreVector> rows, const WeightVector& w) {
  if (rows.empty()) throw EmptyEnsembleError("weighted centroid of an empty polytope");
  if (w.size() != rows.size()) {
    throw DimensionError("weighted centroid: " + std::to_string(w.size()) + " weights for " +
                         std::to_string(rows.size()) + " rows");
  }
  const std::size_t p = rows.front().size();
  std::vector<double> out(p, 0.0);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    if (rows[j].size() != p) throw DimensionError("weighted centroid: ragged polytope");
    for (std::size_t k = 0; k < p; ++k) out[k] += w[j] * rows[j][k];
  }
  return out;
}

std::vector<double> weighted_centroid(const ScorePolytope& poly, const WeightVector& w) {
  return weighted_centroid(poly.rows(), w);
}

std::size_t predict_label(std::span<const double> aggregated) {
  if (aggregated.empty()) throw DimensionError("predict_label on an empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < aggregated.size(); ++k) {
    if (aggregated[k] > aggregated[best]) best = k;
  }
  return best;
}

}  // namespace geovote
