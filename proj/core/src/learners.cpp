#include "geovote/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "geovote/error.hpp"

namespace geovote {

std::string_view to_string(LearnerKind kind) noexcept {
  switch (kind) {
    case LearnerKind::hoeffding_tree:
      return "ht";
    case LearnerKind::naive_bayes:
      return "nb";
  }
  return "?";
}

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "ht" || name == "hoeffding_tree") return LearnerKind::hoeffding_tree;
  if (name == "nb" || name == "naive_bayes") return LearnerKind::naive_bayes;
  throw ConfigError("unknown learner kind '" + std::string(name) + "'");
}

namespace {

void check_record(const StreamRecord& record, std::size_t n_features, std::size_t n_classes) {
  if (record.features.size() != n_features) {
    throw DimensionError("record has " + std::to_string(record.features.size()) + " features, learner expects " +
                         std::to_string(n_features));
  }
  if (record.label >= n_classes) throw DimensionError("record label out of range");
}

/// Numerically stable softmax of log-scores into a ScoreVector.
ScoreVector softmax(std::vector<double> log_scores) {
  const double top = *std::max_element(log_scores.begin(), log_scores.end());
  double sum = 0.0;
  for (double& v : log_scores) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : log_scores) v /= sum;
  return ScoreVector(std::move(log_scores));
}

double entropy(std::span<const double> counts) {
  double total = 0.0;
  for (double c : counts) total += c;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) {
      const double q = c / total;
      h -= q * std::log2(q);
    }
  }
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian naive Bayes

GaussianNaiveBayes::GaussianNaiveBayes(std::size_t n_features, std::size_t n_classes)
    : n_features_(n_features),
      n_classes_(n_classes),
      counts_(n_classes, 0),
      moments_(n_classes * n_features) {
  if (n_classes < 2) throw ConfigError("naive Bayes needs at least 2 classes");
}

void GaussianNaiveBayes::train_one(const StreamRecord& record) {
  check_record(record, n_features_, n_classes_);
  ++counts_[record.label];
  ++total_;
  RunningMoments* row = &moments_[record.label * n_features_];
  for (std::size_t f = 0; f < n_features_; ++f) row[f].add(record.features[f]);
}

ScoreVector GaussianNaiveBayes::score(std::span<const double> features) const {
  if (total_ == 0 || features.size() != n_features_) return ScoreVector::uniform(n_classes_);

  constexpr double kLogTwoPi = 1.8378770664093454836;
  std::vector<double> log_scores(n_classes_, 0.0);
  double best_likelihood = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n_classes_; ++c) {
    if (counts_[c] == 0) continue;
    double log_likelihood = 0.0;
    for (std::size_t f = 0; f < n_features_; ++f) {
      const auto& mom = moments_[c * n_features_ + f];
      const double var = std::max(mom.sample_variance(), kVarianceFloor);
      const double d = features[f] - mom.mean;
      log_likelihood -= 0.5 * (kLogTwoPi + std::log(var)) + d * d / (2.0 * var);
    }
    if (!std::isfinite(log_likelihood)) log_likelihood = -std::numeric_limits<double>::max();
    best_likelihood = std::max(best_likelihood, log_likelihood);
    log_scores[c] = std::log(static_cast<double>(counts_[c]) / static_cast<double>(total_)) + log_likelihood;
  }
  // Unseen classes get a tiny prior and the best likelihood among seen ones,
  // so they keep nonzero mass but never dominate a trained class.
  for (std::size_t c = 0; c < n_classes_; ++c) {
    if (counts_[c] == 0) log_scores[c] = std::log(kUnseenPrior) + best_likelihood;
  }
  return softmax(std::move(log_scores));
}

void GaussianNaiveBayes::reset() {
  std::fill(counts_.begin(), counts_.end(), 0);
  std::fill(moments_.begin(), moments_.end(), RunningMoments{});
  total_ = 0;
}

// ---------------------------------------------------------------------------
// Hoeffding tree

double hoeffding_bound(double range, double confidence, double n) {
  return std::sqrt(range * range * std::log(1.0 / confidence) / (2.0 * n));
}

void HoeffdingTree::ClassGaussian::add(double x) noexcept {
  if (moments.weight == 0.0) {
    min = x;
    max = x;
  } else {
    min = std::min(min, x);
    max = std::max(max, x);
  }
  moments.add(x);
}

double HoeffdingTree::ClassGaussian::weight_at_or_below(double threshold) const noexcept {
  const double w = moments.weight;
  if (w == 0.0 || threshold < min) return 0.0;
  if (threshold >= max) return w;
  const double sd = std::sqrt(moments.sample_variance());
  if (sd <= 0.0) return threshold >= moments.mean ? w : 0.0;
  const double z = (threshold - moments.mean) / sd;
  return w * 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

HoeffdingTree::HoeffdingTree(std::size_t n_features, std::size_t n_classes, HoeffdingTreeOptions options)
    : n_features_(n_features), n_classes_(n_classes), options_(options) {
  if (n_classes < 2) throw ConfigError("Hoeffding tree needs at least 2 classes");
  if (options_.grace_period == 0 || options_.n_bins == 0) throw ConfigError("Hoeffding tree: zero grace period or bins");
  if (!(options_.split_confidence > 0.0 && options_.split_confidence < 1.0)) {
    throw ConfigError("Hoeffding tree: split confidence must lie in (0, 1)");
  }
  reset();
}

void HoeffdingTree::reset() {
  nodes_.clear();
  nodes_.push_back(make_leaf(std::vector<double>(n_classes_, 0.0), 0));
  split_attempts_ = 0;
}

HoeffdingTree::Node HoeffdingTree::make_leaf(std::vector<double> class_counts, std::size_t depth) const {
  Node node;
  node.depth = depth;
  node.class_counts = std::move(class_counts);
  node.observed.assign(n_classes_, 0.0);
  node.observers.resize(n_features_ * n_classes_);
  return node;
}

std::size_t HoeffdingTree::route(std::span<const double> features) const noexcept {
  std::size_t i = 0;
  while (!nodes_[i].leaf) {
    const auto& node = nodes_[i];
    i = features[node.feature] <= node.threshold ? node.left : node.right;
  }
  return i;
}

std::size_t HoeffdingTree::n_leaves() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.leaf; }));
}

std::size_t HoeffdingTree::depth() const noexcept {
  std::size_t d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::span<const double> HoeffdingTree::leaf_counts(std::span<const double> features) const {
  if (features.size() != n_features_) throw DimensionError("leaf_counts: feature arity mismatch");
  return nodes_[route(features)].class_counts;
}

void HoeffdingTree::train_one(const StreamRecord& record) {
  check_record(record, n_features_, n_classes_);
  const std::size_t index = route(record.features);
  Node& leaf = nodes_[index];
  leaf.class_counts[record.label] += 1.0;
  leaf.observed[record.label] += 1.0;
  for (std::size_t f = 0; f < n_features_; ++f) {
    leaf.observers[f * n_classes_ + record.label].add(record.features[f]);
  }

  double seen = 0.0;
  for (double c : leaf.observed) seen += c;
  if (seen - leaf.weight_at_last_attempt >= static_cast<double>(options_.grace_period)) {
    leaf.weight_at_last_attempt = seen;
    attempt_split(index);
  }
}

void HoeffdingTree::attempt_split(std::size_t node_index) {
  const std::size_t p = n_classes_;
  std::vector<double> observed = nodes_[node_index].observed;
  const auto classes_present = std::count_if(observed.begin(), observed.end(), [](double c) { return c > 0.0; });
  if (classes_present < 2) return;
  ++split_attempts_;

  double total = 0.0;
  for (double c : observed) total += c;
  const double parent_entropy = entropy(observed);

  struct Candidate {
    double merit = 0.0;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::vector<double> left;
    std::vector<double> right;
  };
  std::vector<Candidate> best_per_feature;
  best_per_feature.reserve(n_features_);

  std::vector<double> left(p), right(p);
  for (std::size_t f = 0; f < n_features_; ++f) {
    const ClassGaussian* obs = &nodes_[node_index].observers[f * p];
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < p; ++c) {
      if (obs[c].moments.weight == 0.0) continue;
      lo = std::min(lo, obs[c].min);
      hi = std::max(hi, obs[c].max);
    }
    if (!(hi > lo)) continue;

    Candidate best;
    best.merit = -std::numeric_limits<double>::infinity();
    const double step = (hi - lo) / static_cast<double>(options_.n_bins + 1);
    for (std::size_t b = 1; b <= options_.n_bins; ++b) {
      const double threshold = lo + step * static_cast<double>(b);
      double left_total = 0.0;
      for (std::size_t c = 0; c < p; ++c) {
        left[c] = std::min(obs[c].weight_at_or_below(threshold), observed[c]);
        right[c] = observed[c] - left[c];
        left_total += left[c];
      }
      const double right_total = total - left_total;
      if (std::min(left_total, right_total) < options_.min_branch_fraction * total) continue;
      const double merit =
          parent_entropy - (left_total / total) * entropy(left) - (right_total / total) * entropy(right);
      if (merit > best.merit) {
        best.merit = merit;
        best.feature = f;
        best.threshold = threshold;
        best.left = left;
        best.right = right;
      }
    }
    if (std::isfinite(best.merit)) best_per_feature.push_back(std::move(best));
  }
  if (best_per_feature.empty()) return;

  std::stable_sort(best_per_feature.begin(), best_per_feature.end(),
                   [](const Candidate& a, const Candidate& b) { return a.merit > b.merit; });
  const Candidate& best = best_per_feature.front();
  // Not splitting at all has merit 0 and always competes as a candidate.
  const double second = best_per_feature.size() > 1 ? std::max(best_per_feature[1].merit, 0.0) : 0.0;
  const double range = std::log2(static_cast<double>(std::max<std::size_t>(p, 2)));
  const double epsilon = hoeffding_bound(range, options_.split_confidence, total);
  if (!(best.merit > 0.0) || !(best.merit - second > epsilon || epsilon < options_.tie_threshold)) return;

  const std::size_t child_depth = nodes_[node_index].depth + 1;
  Node left_child = make_leaf(best.left, child_depth);
  Node right_child = make_leaf(best.right, child_depth);
  const std::size_t left_index = nodes_.size();
  nodes_.push_back(std::move(left_child));
  nodes_.push_back(std::move(right_child));

  Node& node = nodes_[node_index];
  node.leaf = false;
  node.feature = best.feature;
  node.threshold = best.threshold;
  node.left = left_index;
  node.right = left_index + 1;
  node.observers.clear();
  node.observers.shrink_to_fit();
  node.observed.clear();
}

ScoreVector HoeffdingTree::score(std::span<const double> features) const {
  if (features.size() != n_features_) return ScoreVector::uniform(n_classes_);
  const auto& counts = nodes_[route(features)].class_counts;
  double total = 0.0;
  for (double c : counts) total += c;
  std::vector<double> out(n_classes_);
  const double denom = total + static_cast<double>(n_classes_);
  for (std::size_t k = 0; k < n_classes_; ++k) out[k] = (counts[k] + 1.0) / denom;
  return ScoreVector(std::move(out));
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, std::size_t n_features, std::size_t n_classes,
                                      const HoeffdingTreeOptions& options) {
  switch (kind) {
    case LearnerKind::hoeffding_tree:
      return std::make_unique<HoeffdingTree>(n_features, n_classes, options);
    case LearnerKind::naive_bayes:
      return std::make_unique<GaussianNaiveBayes>(n_features, n_classes);
  }
  throw ConfigError("unknown learner kind");
}

}  // namespace geovote
