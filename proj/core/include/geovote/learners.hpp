#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "geovote/geometry.hpp"
#include "geovote/record.hpp"

namespace geovote {

enum class LearnerKind { hoeffding_tree, naive_bayes };

std::string_view to_string(LearnerKind kind) noexcept;
/// Accepts "ht"/"hoeffding_tree" and "nb"/"naive_bayes". Throws ConfigError.
LearnerKind parse_learner_kind(std::string_view name);

/// An incremental classifier over numeric features.
///
/// score() is const and never fails: before any training it returns the
/// uniform vector, and it always returns a valid ScoreVector. Learners are
/// single-owner; score() may run concurrently with other score() calls but
/// not with train_one() on the same instance.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual void train_one(const StreamRecord& record) = 0;
  virtual ScoreVector score(std::span<const double> features) const = 0;
  virtual void reset() = 0;

  virtual LearnerKind kind() const noexcept = 0;
  virtual std::size_t n_features() const noexcept = 0;
  virtual std::size_t n_classes() const noexcept = 0;
};

/// Running mean and sum of squared deviations (Welford).
struct RunningMoments {
  double weight = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    weight += 1.0;
    const double delta = x - mean;
    mean += delta / weight;
    m2 += delta * (x - mean);
  }
  /// Sample variance (n - 1 denominator); 0 with fewer than two samples.
  double sample_variance() const noexcept { return weight > 1.0 ? m2 / (weight - 1.0) : 0.0; }
};

class GaussianNaiveBayes final : public Learner {
 public:
  static constexpr double kVarianceFloor = 1e-9;
  /// Relative prior given to classes that have not been seen yet.
  static constexpr double kUnseenPrior = 1e-9;

  GaussianNaiveBayes(std::size_t n_features, std::size_t n_classes);

  void train_one(const StreamRecord& record) override;
  ScoreVector score(std::span<const double> features) const override;
  void reset() override;

  LearnerKind kind() const noexcept override { return LearnerKind::naive_bayes; }
  std::size_t n_features() const noexcept override { return n_features_; }
  std::size_t n_classes() const noexcept override { return n_classes_; }

  std::uint64_t class_count(std::size_t c) const noexcept { return counts_[c]; }
  std::uint64_t total_count() const noexcept { return total_; }
  double mean(std::size_t c, std::size_t f) const noexcept { return moments_[c * n_features_ + f].mean; }
  double variance(std::size_t c, std::size_t f) const noexcept {
    return moments_[c * n_features_ + f].sample_variance();
  }

 private:
  std::size_t n_features_;
  std::size_t n_classes_;
  std::vector<std::uint64_t> counts_;
  std::vector<RunningMoments> moments_;
  std::uint64_t total_ = 0;
};

struct HoeffdingTreeOptions {
  double split_confidence = 1e-7;  ///< delta
  double tie_threshold = 0.05;     ///< tau
  std::size_t grace_period = 200;  ///< instances between split attempts at a leaf
  std::size_t n_bins = 10;         ///< equal-width candidate thresholds per feature
  double min_branch_fraction = 0.01;
};

/// sqrt(range^2 * ln(1/confidence) / (2 n))
double hoeffding_bound(double range, double confidence, double n);

/// Incremental decision tree (VFDT) with binary numeric splits.
///
/// Every leaf keeps, per feature and class, a Gaussian summary (weight, mean,
/// variance, min, max). Candidate thresholds are `n_bins` equally spaced
/// points strictly inside the observed [min, max] of the feature, and the
/// class mass on each side is estimated from the Gaussian CDFs. Splits use
/// information gain with range log2(p). Leaves predict Laplace-smoothed
/// class frequencies (count_k + 1) / (total + p).
class HoeffdingTree final : public Learner {
 public:
  HoeffdingTree(std::size_t n_features, std::size_t n_classes, HoeffdingTreeOptions options = {});

  void train_one(const StreamRecord& record) override;
  ScoreVector score(std::span<const double> features) const override;
  void reset() override;

  LearnerKind kind() const noexcept override { return LearnerKind::hoeffding_tree; }
  std::size_t n_features() const noexcept override { return n_features_; }
  std::size_t n_classes() const noexcept override { return n_classes_; }

  const HoeffdingTreeOptions& options() const noexcept { return options_; }
  std::size_t n_nodes() const noexcept { return nodes_.size(); }
  std::size_t n_leaves() const noexcept;
  std::size_t n_splits() const noexcept { return (nodes_.size() - 1) / 2; }
  std::size_t depth() const noexcept;
  std::size_t n_split_attempts() const noexcept { return split_attempts_; }

  /// Class counts at the leaf that `features` routes to.
  std::span<const double> leaf_counts(std::span<const double> features) const;

 private:
  struct ClassGaussian {
    RunningMoments moments;
    double min = 0.0;
    double max = 0.0;

    void add(double x) noexcept;
    /// Estimated weight of this class with value <= threshold.
    double weight_at_or_below(double threshold) const noexcept;
  };

  struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    std::size_t depth = 0;
    std::vector<double> class_counts;  ///< prediction counts, seeded at split time
    std::vector<double> observed;      ///< counts since the leaf was created
    std::vector<ClassGaussian> observers;  ///< [feature * p + class]
    double weight_at_last_attempt = 0.0;
  };

  std::size_t route(std::span<const double> features) const noexcept;
  Node make_leaf(std::vector<double> class_counts, std::size_t depth) const;
  void attempt_split(std::size_t node_index);

  std::size_t n_features_;
  std::size_t n_classes_;
  HoeffdingTreeOptions options_;
  std::vector<Node> nodes_;
  std::size_t split_attempts_ = 0;
};

std::unique_ptr<Learner> make_learner(LearnerKind kind, std::size_t n_features, std::size_t n_classes,
                                      const HoeffdingTreeOptions& options = {});

}  // namespace geovote
