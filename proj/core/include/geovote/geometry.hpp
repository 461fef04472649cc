#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace geovote {

/// Tolerance on the sum-to-one invariant of probability vectors.
inline constexpr double kSimplexTolerance = 1e-9;

/// One component's soft vote for one instance: a point on the probability
/// simplex in p dimensions, p >= 2. Construction validates the invariant
/// instead of renormalizing, so a learner that emits a bad vector fails loudly.
class ScoreVector {
 public:
  explicit ScoreVector(std::vector<double> scores);

  static ScoreVector uniform(std::size_t p);

  std::size_t size() const noexcept { return scores_.size(); }
  double operator[](std::size_t k) const noexcept { return scores_[k]; }
  std::span<const double> values() const noexcept { return scores_; }

  friend bool operator==(const ScoreVector&, const ScoreVector&) = default;

 private:
  std::vector<double> scores_;
};

/// One-hot encoding of a true class label.
class IdealPoint {
 public:
  IdealPoint(std::size_t p, std::size_t label_index);

  std::size_t size() const noexcept { return point_.size(); }
  std::size_t label_index() const noexcept { return label_; }
  std::span<const double> values() const noexcept { return point_; }

 private:
  std::vector<double> point_;
  std::size_t label_;
};

/// The m votes cast for one instance together with its ideal point.
class ScorePolytope {
 public:
  ScorePolytope(std::vector<ScoreVector> rows, IdealPoint ideal);

  std::size_t m() const noexcept { return rows_.size(); }
  std::size_t p() const noexcept { return ideal_.size(); }
  std::span<const ScoreVector> rows() const noexcept { return rows_; }
  const ScoreVector& row(std::size_t j) const noexcept { return rows_[j]; }
  const IdealPoint& ideal() const noexcept { return ideal_; }

 private:
  std::vector<ScoreVector> rows_;
  IdealPoint ideal_;
};

enum class WeightMode {
  raw,      ///< unconstrained least-squares weights
  simplex,  ///< non-negative weights summing to one
};

class WeightVector {
 public:
  /// Validates finiteness, plus the simplex invariant in simplex mode.
  WeightVector(std::vector<double> weights, WeightMode mode);

  static WeightVector uniform(std::size_t m);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t j) const noexcept { return weights_[j]; }
  std::span<const double> values() const noexcept { return weights_; }
  WeightMode mode() const noexcept { return mode_; }

 private:
  std::vector<double> weights_;
  WeightMode mode_;
};

/// Euclidean distance.
double loss(std::span<const double> a, std::span<const double> b);

/// Column means of the vote rows: the majority-voting aggregate.
std::vector<double> centroid(std::span<const ScoreVector> rows);
std::vector<double> centroid(const ScorePolytope& poly);

/// Weighted sum of the vote rows: the weighted-majority-voting aggregate.
std::vector<double> weighted_centroid(std::span<const ScoreVector> rows, const WeightVector& w);
std::vector<double> weighted_centroid(const ScorePolytope& poly, const WeightVector& w);

/// Index of the largest entry; the lowest index wins ties.
std::size_t predict_label(std::span<const double> aggregated);

}  // namespace geovote
