#include "geovote/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "geovote/error.hpp"

namespace geovote {

NormalSystem::NormalSystem(std::size_t m) : lambda_(m), gamma_(m, 0.0) {
  if (m == 0) throw EmptyEnsembleError("normal system for an empty ensemble");
}

NormalSystem::NormalSystem(SquareMatrix lambda, std::vector<double> gamma, std::size_t instances_seen)
    : lambda_(std::move(lambda)), gamma_(std::move(gamma)), instances_seen_(instances_seen) {
  if (lambda_.size() != gamma_.size()) throw DimensionError("normal system: lambda and gamma sizes differ");
  if (gamma_.empty()) throw EmptyEnsembleError("normal system for an empty ensemble");
}

void NormalSystem::accumulate(const ScorePolytope& poly) { accumulate(poly.rows(), poly.ideal().label_index()); }

namespace {

// Four independent partial sums let the compiler keep several
// multiply-adds in flight.
double dot(const double* a, const double* b, std::size_t n) noexcept {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

}  // namespace

NormalSystem NormalSystem::from_score_rows(std::size_t m, std::size_t p, std::span<const double> scores,
                                           std::span<const std::size_t> labels) {
  NormalSystem out(m);
  const std::size_t n = labels.size();
  if (p == 0 || scores.size() != m * n * p) throw DimensionError("from_score_rows: score block has the wrong size");
  const std::size_t stride = n * p;
  for (std::size_t q = 0; q < m; ++q) {
    const double* sq = scores.data() + q * stride;
    for (std::size_t j = q; j < m; ++j) {
      const double v = dot(sq, scores.data() + j * stride, stride);
      out.lambda_(q, j) = v;
      out.lambda_(j, q) = v;
    }
    double g = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] >= p) throw DimensionError("from_score_rows: label index out of range");
      g += sq[i * p + labels[i]];
    }
    out.gamma_[q] = g;
  }
  out.instances_seen_ = n;
  return out;
}

void NormalSystem::accumulate(std::span<const ScoreVector> rows, std::size_t label_index) {
  const std::size_t m = size();
  if (rows.size() != m) {
    throw DimensionError("accumulate: polytope has " + std::to_string(rows.size()) + " rows, system has " +
                         std::to_string(m));
  }
  const std::size_t p = rows.front().size();
  if (label_index >= p) throw DimensionError("accumulate: label index out of range");
  for (const auto& row : rows) {
    if (row.size() != p) throw DimensionError("accumulate: ragged polytope");
  }

  for (std::size_t q = 0; q < m; ++q) {
    const auto sq = rows[q].values();
    for (std::size_t j = q; j < m; ++j) {
      const auto sj = rows[j].values();
      double v = 0.0;
      for (std::size_t k = 0; k < p; ++k) v += sq[k] * sj[k];
      lambda_(q, j) += v;
      if (j != q) lambda_(j, q) += v;
    }
    // The ideal point is one-hot, so <o, s_q> is the score at the label.
    gamma_[q] += sq[label_index];
  }
  ++instances_seen_;
}

namespace {

RankDiagnostics diagnostics_from(std::span<const double> eigenvalues) {
  double sigma_max = 0.0;
  double sigma_min = std::numeric_limits<double>::infinity();
  for (double e : eigenvalues) {
    sigma_max = std::max(sigma_max, std::abs(e));
    sigma_min = std::min(sigma_min, std::abs(e));
  }
  RankDiagnostics out;
  if (sigma_max == 0.0) return out;
  out.smallest_singular_ratio = sigma_min / sigma_max;
  for (double e : eigenvalues) {
    if (std::abs(e) > kRankThreshold * sigma_max) ++out.rank_estimate;
  }
  return out;
}

void require_finite(const NormalSystem& system) {
  for (double v : system.lambda().data()) {
    if (!std::isfinite(v)) throw NumericError("normal system has a non-finite lambda entry");
  }
  for (double v : system.gamma()) {
    if (!std::isfinite(v)) throw NumericError("normal system has a non-finite gamma entry");
  }
}

/// x = sum_i v_i (v_i . b) / (e_i + ridge)
std::vector<double> spectral_solve(const SymmetricEigen& eig, std::span<const double> b, double ridge) {
  const std::size_t m = b.size();
  std::vector<double> x(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const double denom = eig.values[i] + ridge;
    if (denom == 0.0) continue;
    double proj = 0.0;
    for (std::size_t r = 0; r < m; ++r) proj += eig.vectors(r, i) * b[r];
    const double coef = proj / denom;
    for (std::size_t r = 0; r < m; ++r) x[r] += coef * eig.vectors(r, i);
  }
  return x;
}

}  // namespace

RankDiagnostics rank_diagnostics(const NormalSystem& system) {
  const auto eig = symmetric_eigen(system.lambda());
  return diagnostics_from(eig.values);
}

WeightVector to_simplex(std::span<const double> raw) {
  std::vector<double> w(raw.begin(), raw.end());
  double sum = 0.0;
  for (double& v : w) {
    v = std::max(v, 0.0);
    sum += v;
  }
  if (!(sum > 0.0)) return WeightVector::uniform(w.size());
  for (double& v : w) v /= sum;
  return WeightVector(std::move(w), WeightMode::simplex);
}

WeightSolution solve(const NormalSystem& system, WeightMode mode) {
  if (system.instances_seen() == 0) throw EmptySystemError("solve: no instances accumulated");
  require_finite(system);

  const auto& lambda = system.lambda();
  const std::size_t m = system.size();
  const auto eig = symmetric_eigen(lambda);
  const auto diag = diagnostics_from(eig.values);

  double ridge = 0.0;
  if (diag.smallest_singular_ratio < kRankThreshold) {
    ridge = kRankThreshold * lambda.trace() / static_cast<double>(m);
  }

  std::vector<double> w = spectral_solve(eig, system.gamma(), ridge);
  if (ridge == 0.0) {
    // One step of iterative refinement tightens the residual on
    // moderately conditioned systems.
    const auto lw = lambda.multiply(w);
    std::vector<double> residual(m);
    for (std::size_t i = 0; i < m; ++i) residual[i] = system.gamma()[i] - lw[i];
    const auto correction = spectral_solve(eig, residual, 0.0);
    for (std::size_t i = 0; i < m; ++i) w[i] += correction[i];
  }
  for (double v : w) {
    if (!std::isfinite(v)) throw NumericError("solve produced a non-finite weight");
  }

  WeightVector weights = mode == WeightMode::simplex ? to_simplex(w) : WeightVector(std::move(w), WeightMode::raw);
  return WeightSolution{std::move(weights), mode, diag.rank_estimate, diag.smallest_singular_ratio, ridge};
}

}  // namespace geovote
