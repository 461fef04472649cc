#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "geovote/geometry.hpp"
#include "geovote/learners.hpp"
#include "geovote/record.hpp"
#include "geovote/rng.hpp"
#include "geovote/weights.hpp"

namespace geovote {

enum class Aggregation { mv, wmv };

std::string_view to_string(Aggregation a) noexcept;
Aggregation parse_aggregation(std::string_view name);

struct EnsembleConfig {
  std::size_t size = 2;
  LearnerKind base_learner = LearnerKind::hoeffding_tree;
  /// Per-slot learner kinds for heterogeneous ensembles; overrides
  /// base_learner when non-empty and must then have `size` entries.
  std::vector<LearnerKind> slot_learners;
  Aggregation aggregation = Aggregation::mv;
  /// Poisson rate of per-component replication. 0 trains every component
  /// exactly once per instance.
  double bagging_lambda = 0.0;
  std::size_t window_length = 500;
  WeightMode weight_mode = WeightMode::simplex;
  /// Under wmv the weights are re-solved every `refresh_period` instances.
  std::size_t refresh_period = 1;
  /// Under wmv, use these weights forever instead of solving.
  std::optional<std::vector<double>> fixed_weights;
  HoeffdingTreeOptions tree_options;
  std::uint64_t seed = 1;
  std::uint64_t run_id = 0;

  void validate() const;
};

struct WindowEntry {
  StreamRecord record;
  std::vector<ScoreVector> votes;  ///< what each component scored at prediction time
};

/// FIFO of the most recent labeled instances and their votes.
class InstanceWindow {
 public:
  explicit InstanceWindow(std::size_t capacity);

  void push(WindowEntry entry);
  void clear() noexcept { entries_.clear(); }

  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool full() const noexcept { return entries_.size() == capacity_; }
  bool empty() const noexcept { return entries_.empty(); }
  const WindowEntry& operator[](std::size_t i) const noexcept { return entries_[i]; }
  const WindowEntry& front() const noexcept { return entries_.front(); }
  const WindowEntry& back() const noexcept { return entries_.back(); }
  auto begin() const noexcept { return entries_.begin(); }
  auto end() const noexcept { return entries_.end(); }

 private:
  std::size_t capacity_;
  std::deque<WindowEntry> entries_;
};

/// Anything the prequential loop can test and then train.
class OnlineClassifier {
 public:
  virtual ~OnlineClassifier() = default;
  virtual std::size_t predict(std::span<const double> features) = 0;
  virtual void train_one(const StreamRecord& record) = 0;
};

struct EnsemblePrediction {
  std::size_t label = 0;
  std::vector<double> aggregated;
  std::vector<ScoreVector> votes;  ///< one row per component
};

/// Fixed-size ensemble of incremental learners with MV or WMV aggregation.
///
/// Component j draws its replication counts from its own PRNG stream,
/// derived from (seed, run_id, j), so results do not depend on how runs are
/// scheduled. Under wmv the normal system is rebuilt from the instance
/// window on every refresh; weights are uniform until the first solve.
class Ensemble final : public OnlineClassifier {
 public:
  Ensemble(EnsembleConfig config, std::size_t n_features, std::size_t n_classes);
  /// Uses caller-supplied components; config.size must match.
  Ensemble(EnsembleConfig config, std::vector<std::unique_ptr<Learner>> components);

  EnsemblePrediction vote(std::span<const double> features);
  std::size_t predict(std::span<const double> features) override { return vote(features).label; }
  void train_one(const StreamRecord& record) override;

  /// Keeps only the listed components (with their PRNG streams and window
  /// votes) under a new configuration. Under wmv the weights are solved
  /// immediately from the carried window.
  Ensemble subset(std::span<const std::size_t> keep, EnsembleConfig config) &&;

  const EnsembleConfig& config() const noexcept { return config_; }
  std::size_t size() const noexcept { return components_.size(); }
  std::size_t n_classes() const noexcept { return n_classes_; }
  const Learner& component(std::size_t j) const noexcept { return *components_[j]; }
  const InstanceWindow& window() const noexcept { return window_; }
  const WeightVector& weights() const noexcept { return weights_; }
  const std::optional<WeightSolution>& last_solution() const noexcept { return solution_; }
  std::uint64_t replications(std::size_t j) const noexcept { return replications_[j]; }

  /// Per component, whether its hard vote was correct on each window entry.
  std::vector<std::vector<bool>> window_correctness() const;

  /// Re-solves the weights from the current window (no-op for mv).
  void refresh_weights();

 private:
  std::vector<ScoreVector> collect_votes(std::span<const double> features) const;

  EnsembleConfig config_;
  std::size_t n_classes_ = 0;
  std::vector<std::unique_ptr<Learner>> components_;
  std::vector<Rng> rngs_;
  std::vector<std::uint64_t> replications_;
  InstanceWindow window_;
  WeightVector weights_;
  std::optional<WeightSolution> solution_;
  std::size_t since_refresh_ = 0;

  std::vector<double> cached_features_;
  std::vector<ScoreVector> cached_votes_;
  bool cache_valid_ = false;
};

/// Yule's Q over two correctness sequences. nullopt when the denominator
/// N11*N00 + N01*N10 is zero.
std::optional<double> q_statistic(const std::vector<bool>& correct_r, const std::vector<bool>& correct_s);

/// Pairwise Q matrix; undefined entries are 0 and the diagonal is 1.
std::vector<std::vector<double>> q_matrix(const std::vector<std::vector<bool>>& correctness);

/// Pair (r < s) with the lowest Q, undefined Q counting as 0. Ties go to the
/// lexicographically smallest pair. Throws ConfigError for fewer than two
/// components and DimensionError for an empty window.
std::pair<std::size_t, std::size_t> select_most_diverse_pair(const std::vector<std::vector<bool>>& correctness);

enum class Scenario {
  levbag_m,  ///< m bagged trees, majority vote
  sel2div,   ///< most diverse pair out of a bagged pool, weighted vote
  hyb_htnb,  ///< one tree plus one naive Bayes, no resampling, weighted vote
};

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

struct ScenarioParams {
  std::size_t m = 2;           ///< levbag_m only
  std::size_t pool_size = 10;  ///< sel2div only
  double bagging_lambda = 6.0;
  std::size_t window_length = 100;
  WeightMode weight_mode = WeightMode::simplex;
  std::size_t refresh_period = 1;
  HoeffdingTreeOptions tree_options;
  std::uint64_t seed = 1;
  std::uint64_t run_id = 0;
};

/// A configured diversity-scenario ensemble.
///
/// For sel2div the pool votes by majority until its window first fills; the
/// most diverse pair is then selected once and kept, and the remaining pool
/// members are discarded.
class ScenarioEnsemble final : public OnlineClassifier {
 public:
  struct Selection {
    std::pair<std::size_t, std::size_t> pair;
    std::vector<std::vector<double>> q_matrix;
    std::uint64_t at_instance = 0;
  };

  /// `pair_config` is the configuration the selected pair runs under
  /// (sel2div only).
  ScenarioEnsemble(Scenario scenario, Ensemble ensemble, std::optional<EnsembleConfig> pair_config = std::nullopt);

  std::size_t predict(std::span<const double> features) override { return active_.predict(features); }
  void train_one(const StreamRecord& record) override;

  Scenario scenario() const noexcept { return scenario_; }
  const Ensemble& active() const noexcept { return active_; }
  std::size_t instantiated_components() const noexcept { return instantiated_; }
  const std::optional<Selection>& selection() const noexcept { return selection_; }

 private:
  Scenario scenario_;
  Ensemble active_;
  std::size_t instantiated_;
  std::optional<Selection> selection_;
  std::optional<EnsembleConfig> pair_config_;
  std::uint64_t seen_ = 0;
};

ScenarioEnsemble build_scenario(Scenario scenario, const ScenarioParams& params, std::size_t n_features,
                                std::size_t n_classes);

}  // namespace geovote
