#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geovote/evaluation.hpp"
#include "geovote/geometry.hpp"
#include "geovote/rng.hpp"

namespace geovote {

/// Uniform sample from the probability simplex (normalised exponentials).
ScoreVector random_score_vector(Rng& rng, std::size_t p);

struct SuiteGroup {
  std::string name;
  std::size_t cases = 0;
  std::size_t violations = 0;
  /// Smallest (bound - value) seen; negative beyond the tolerance is a violation.
  double worst_margin = 0.0;
};

struct SuiteReport {
  std::vector<SuiteGroup> groups;
  bool passed() const noexcept;
};

/// Randomised checks of the aggregation bounds:
///   centroid-bound     loss(centroid) <= mean component loss
///   leave-one-out      loss(centroid) <= mean loss of leave-one-out centroids
///   optimum-weights    windowed SSE of raw weights <= best single component
///   rank-deficiency    single-instance Lambda with m > p has rank <= p
/// and a supplementary agreement-degeneracy group (m = p = 2, identical
/// votes give det Lambda = 0).
SuiteReport run_theorem_suite(std::uint64_t seed, std::size_t cases_per_group = 10000);

/// Reference benchmark accuracies (percent): 6 datasets x 9 ensembles.
const ResultMatrix& reference_accuracy_table();
/// Mean Friedman ranks of the reference table's ensembles, 3 decimals.
std::span<const double> reference_mean_ranks();

struct StatsCheck {
  bool passed = false;
  std::vector<std::string> failures;
  FriedmanResult result;
};

/// Checks `table` cell by cell against the reference table, then checks the
/// Friedman mean ranks (within 1e-3) and the rejection at alpha = 0.05.
StatsCheck verify_reference_statistics(const ResultMatrix& table);

}  // namespace geovote
