#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "geovote/geometry.hpp"
#include "geovote/linalg.hpp"

namespace geovote {

/// Relative singular-value threshold below which the normal matrix is
/// treated as rank deficient.
inline constexpr double kRankThreshold = 1e-10;

/// Normal equations `w * Lambda = gamma` of the least-squares weight problem,
/// summed over every instance accumulated so far.
///
/// For one instance with vote rows s_q and ideal point o:
///   Lambda[q][j] += <s_q, s_j>
///   gamma[q]     += <o, s_q>
/// Lambda is a sum of Gram matrices and therefore symmetric PSD.
class NormalSystem {
 public:
  explicit NormalSystem(std::size_t m);

  /// Builds a system from explicit parts (instances_seen must be >= 0).
  NormalSystem(SquareMatrix lambda, std::vector<double> gamma, std::size_t instances_seen);

  /// Builds the system for n = labels.size() instances in one pass.
  /// `scores` is component-major: the score of component q for class k on
  /// instance i sits at q * n * p + i * p + k.
  static NormalSystem from_score_rows(std::size_t m, std::size_t p, std::span<const double> scores,
                                      std::span<const std::size_t> labels);

  void accumulate(const ScorePolytope& poly);
  /// Same as accumulate() without materialising a polytope.
  void accumulate(std::span<const ScoreVector> rows, std::size_t label_index);

  std::size_t size() const noexcept { return gamma_.size(); }
  std::size_t instances_seen() const noexcept { return instances_seen_; }
  const SquareMatrix& lambda() const noexcept { return lambda_; }
  std::span<const double> gamma() const noexcept { return gamma_; }

 private:
  SquareMatrix lambda_;
  std::vector<double> gamma_;
  std::size_t instances_seen_ = 0;
};

struct RankDiagnostics {
  std::size_t rank_estimate = 0;
  double smallest_singular_ratio = 0.0;  ///< sigma_min / sigma_max, 0 for a zero matrix
};

struct WeightSolution {
  WeightVector weights;
  WeightMode mode;
  std::size_t rank_estimate;
  double smallest_singular_ratio;
  double regularization_used;
};

RankDiagnostics rank_diagnostics(const NormalSystem& system);

/// Solves the normal equations for the optimum weight vector.
///
/// When sigma_min / sigma_max < kRankThreshold, a ridge term of
/// `kRankThreshold * trace(Lambda) / m` is added to the diagonal, which
/// approximates the minimum-norm least-squares solution. In simplex mode the
/// raw solution is clipped at zero and renormalised; if nothing positive
/// remains the weights fall back to uniform.
///
/// Throws EmptySystemError when no instance has been accumulated and
/// NumericError on non-finite input.
WeightSolution solve(const NormalSystem& system, WeightMode mode);

/// Clip-and-renormalise projection used by simplex mode.
WeightVector to_simplex(std::span<const double> raw);

}  // namespace geovote
