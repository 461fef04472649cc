#include "geovote/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "geovote/error.hpp"

namespace geovote {

std::string_view to_string(Aggregation a) noexcept { return a == Aggregation::mv ? "mv" : "wmv"; }

Aggregation parse_aggregation(std::string_view name) {
  if (name == "mv") return Aggregation::mv;
  if (name == "wmv") return Aggregation::wmv;
  throw ConfigError("unknown aggregation '" + std::string(name) + "'");
}

void EnsembleConfig::validate() const {
  if (size < 2) throw ConfigError("ensemble size must be >= 2");
  if (!slot_learners.empty() && slot_learners.size() != size) {
    throw ConfigError("slot_learners has " + std::to_string(slot_learners.size()) + " entries for size " +
                      std::to_string(size));
  }
  if (!(bagging_lambda >= 0.0) || !std::isfinite(bagging_lambda)) throw ConfigError("bagging_lambda must be >= 0");
  if (window_length == 0) throw ConfigError("window_length must be >= 1");
  if (refresh_period == 0) throw ConfigError("refresh_period must be >= 1");
  if (fixed_weights && fixed_weights->size() != size) throw ConfigError("fixed_weights length differs from size");
}

// ---------------------------------------------------------------------------

InstanceWindow::InstanceWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("instance window capacity must be >= 1");
}

void InstanceWindow::push(WindowEntry entry) {
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back(std::move(entry));
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::unique_ptr<Learner>> make_components(const EnsembleConfig& config, std::size_t n_features,
                                                      std::size_t n_classes) {
  config.validate();
  std::vector<std::unique_ptr<Learner>> out;
  out.reserve(config.size);
  for (std::size_t j = 0; j < config.size; ++j) {
    const auto kind = config.slot_learners.empty() ? config.base_learner : config.slot_learners[j];
    out.push_back(make_learner(kind, n_features, n_classes, config.tree_options));
  }
  return out;
}

WeightVector initial_weights(const EnsembleConfig& config) {
  if (config.aggregation == Aggregation::wmv && config.fixed_weights) {
    return WeightVector(*config.fixed_weights, WeightMode::raw);
  }
  return WeightVector::uniform(config.size);
}

}  // namespace

Ensemble::Ensemble(EnsembleConfig config, std::size_t n_features, std::size_t n_classes)
    : Ensemble(config, make_components(config, n_features, n_classes)) {}

Ensemble::Ensemble(EnsembleConfig config, std::vector<std::unique_ptr<Learner>> components)
    : config_(std::move(config)),
      components_(std::move(components)),
      window_(config_.window_length),
      weights_(initial_weights(config_)) {
  config_.validate();
  if (components_.size() != config_.size) throw ConfigError("component count differs from configured size");
  n_classes_ = components_.front()->n_classes();
  for (const auto& c : components_) {
    if (c->n_classes() != n_classes_) throw ConfigError("components disagree on the number of classes");
  }
  const Rng run_rng = Rng(config_.seed).split(config_.run_id);
  for (std::size_t j = 0; j < components_.size(); ++j) rngs_.push_back(run_rng.split(j));
  replications_.assign(components_.size(), 0);
}

std::vector<ScoreVector> Ensemble::collect_votes(std::span<const double> features) const {
  std::vector<ScoreVector> votes;
  votes.reserve(components_.size());
  for (std::size_t j = 0; j < components_.size(); ++j) {
    try {
      votes.push_back(components_[j]->score(features));
    } catch (const Error& e) {
      throw NumericError("component " + std::to_string(j) + ": " + e.what());
    }
    if (votes.back().size() != n_classes_) {
      throw DimensionError("component " + std::to_string(j) + " returned a score vector of the wrong length");
    }
  }
  return votes;
}

EnsemblePrediction Ensemble::vote(std::span<const double> features) {
  EnsemblePrediction out;
  out.votes = collect_votes(features);
  out.aggregated = config_.aggregation == Aggregation::mv ? centroid(std::span<const ScoreVector>(out.votes))
                                                          : weighted_centroid(out.votes, weights_);
  out.label = predict_label(out.aggregated);

  cached_features_.assign(features.begin(), features.end());
  cached_votes_ = out.votes;
  cache_valid_ = true;
  return out;
}

void Ensemble::train_one(const StreamRecord& record) {
  const std::size_t arity = components_.front()->n_features();
  if (record.features.size() != arity) {
    throw DimensionError("record has " + std::to_string(record.features.size()) + " features, ensemble expects " +
                         std::to_string(arity));
  }
  if (record.label >= n_classes_) throw DimensionError("record label out of range");

  std::vector<ScoreVector> votes;
  if (cache_valid_ && cached_features_ == record.features) {
    votes = std::move(cached_votes_);
  } else {
    votes = collect_votes(record.features);
  }
  cache_valid_ = false;

  for (std::size_t j = 0; j < components_.size(); ++j) {
    const std::uint64_t k = config_.bagging_lambda > 0.0 ? rngs_[j].poisson(config_.bagging_lambda) : 1;
    for (std::uint64_t r = 0; r < k; ++r) components_[j]->train_one(record);
    replications_[j] += k;
  }
  window_.push(WindowEntry{record, std::move(votes)});
  if (config_.aggregation != Aggregation::wmv || config_.fixed_weights) return;

  if (++since_refresh_ >= config_.refresh_period) {
    since_refresh_ = 0;
    refresh_weights();
  }
}

void Ensemble::refresh_weights() {
  if (config_.aggregation != Aggregation::wmv || config_.fixed_weights || window_.empty()) return;
  const std::size_t m = components_.size();
  const std::size_t n = window_.size();
  const std::size_t p = n_classes_;
  // Component-major copy of the window so each Lambda entry is one
  // contiguous dot product.
  std::vector<double> block(m * n * p);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& entry = window_[i];
    labels[i] = entry.record.label;
    for (std::size_t q = 0; q < m; ++q) {
      const auto row = entry.votes[q].values();
      std::copy(row.begin(), row.end(), block.begin() + static_cast<std::ptrdiff_t>(q * n * p + i * p));
    }
  }
  solution_ = solve(NormalSystem::from_score_rows(m, p, block, labels), config_.weight_mode);
  weights_ = solution_->weights;
}

std::vector<std::vector<bool>> Ensemble::window_correctness() const {
  std::vector<std::vector<bool>> out(components_.size());
  for (auto& row : out) row.reserve(window_.size());
  for (const auto& entry : window_) {
    for (std::size_t j = 0; j < components_.size(); ++j) {
      out[j].push_back(predict_label(entry.votes[j].values()) == entry.record.label);
    }
  }
  return out;
}

Ensemble Ensemble::subset(std::span<const std::size_t> keep, EnsembleConfig config) && {
  if (keep.size() != config.size) throw ConfigError("subset: kept component count differs from new size");
  std::vector<std::unique_ptr<Learner>> kept;
  for (std::size_t j : keep) {
    if (j >= components_.size() || !components_[j]) throw ConfigError("subset: bad component index");
    kept.push_back(std::move(components_[j]));
  }
  Ensemble out(std::move(config), std::move(kept));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.rngs_[i] = rngs_[keep[i]];
    out.replications_[i] = replications_[keep[i]];
  }
  for (const auto& entry : window_) {
    std::vector<ScoreVector> votes;
    for (std::size_t j : keep) votes.push_back(entry.votes[j]);
    out.window_.push(WindowEntry{entry.record, std::move(votes)});
  }
  out.refresh_weights();
  return out;
}

// ---------------------------------------------------------------------------

std::optional<double> q_statistic(const std::vector<bool>& correct_r, const std::vector<bool>& correct_s) {
  if (correct_r.size() != correct_s.size()) throw DimensionError("q_statistic: sequence lengths differ");
  double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
  for (std::size_t i = 0; i < correct_r.size(); ++i) {
    if (correct_r[i] && correct_s[i]) {
      ++n11;
    } else if (!correct_r[i] && !correct_s[i]) {
      ++n00;
    } else if (correct_r[i]) {
      ++n10;
    } else {
      ++n01;
    }
  }
  const double agree = n11 * n00;
  const double disagree = n01 * n10;
  if (agree + disagree == 0.0) return std::nullopt;
  return (agree - disagree) / (agree + disagree);
}

std::vector<std::vector<double>> q_matrix(const std::vector<std::vector<bool>>& correctness) {
  const std::size_t n = correctness.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(n, 1.0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = r + 1; s < n; ++s) {
      const double q = q_statistic(correctness[r], correctness[s]).value_or(0.0);
      out[r][s] = q;
      out[s][r] = q;
    }
  }
  return out;
}

std::pair<std::size_t, std::size_t> select_most_diverse_pair(const std::vector<std::vector<bool>>& correctness) {
  if (correctness.size() < 2) throw ConfigError("pair selection needs at least 2 components");
  if (correctness.front().empty()) throw DimensionError("pair selection over an empty window");
  std::pair<std::size_t, std::size_t> best{0, 1};
  double best_q = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < correctness.size(); ++r) {
    for (std::size_t s = r + 1; s < correctness.size(); ++s) {
      const double q = q_statistic(correctness[r], correctness[s]).value_or(0.0);
      if (q < best_q) {
        best_q = q;
        best = {r, s};
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::levbag_m:
      return "levbag_m";
    case Scenario::sel2div:
      return "sel2div";
    case Scenario::hyb_htnb:
      return "hyb_htnb";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "levbag_m" || name == "levbag") return Scenario::levbag_m;
  if (name == "sel2div") return Scenario::sel2div;
  if (name == "hyb_htnb") return Scenario::hyb_htnb;
  throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

ScenarioEnsemble::ScenarioEnsemble(Scenario scenario, Ensemble ensemble, std::optional<EnsembleConfig> pair_config)
    : scenario_(scenario),
      active_(std::move(ensemble)),
      instantiated_(active_.size()),
      pair_config_(std::move(pair_config)) {
  if (scenario_ == Scenario::sel2div && !pair_config_) throw ConfigError("sel2div needs a pair configuration");
}

void ScenarioEnsemble::train_one(const StreamRecord& record) {
  active_.train_one(record);
  ++seen_;
  if (scenario_ == Scenario::sel2div && !selection_ && active_.window().full()) {
    const auto correctness = active_.window_correctness();
    Selection sel;
    sel.pair = select_most_diverse_pair(correctness);
    sel.q_matrix = q_matrix(correctness);
    sel.at_instance = seen_;
    const std::size_t keep[2] = {sel.pair.first, sel.pair.second};
    active_ = std::move(active_).subset(keep, *pair_config_);
    selection_ = std::move(sel);
  }
}

ScenarioEnsemble build_scenario(Scenario scenario, const ScenarioParams& params, std::size_t n_features,
                                std::size_t n_classes) {
  EnsembleConfig config;
  config.bagging_lambda = params.bagging_lambda;
  config.window_length = params.window_length;
  config.weight_mode = params.weight_mode;
  config.refresh_period = params.refresh_period;
  config.tree_options = params.tree_options;
  config.seed = params.seed;
  config.run_id = params.run_id;

  switch (scenario) {
    case Scenario::levbag_m: {
      config.size = params.m;
      config.aggregation = Aggregation::mv;
      config.base_learner = LearnerKind::hoeffding_tree;
      return ScenarioEnsemble(scenario, Ensemble(config, n_features, n_classes));
    }
    case Scenario::sel2div: {
      if (params.pool_size < 2) throw ConfigError("sel2div pool size must be >= 2");
      config.size = params.pool_size;
      config.aggregation = Aggregation::mv;
      config.base_learner = LearnerKind::hoeffding_tree;
      EnsembleConfig pair = config;
      pair.size = 2;
      pair.aggregation = Aggregation::wmv;
      return ScenarioEnsemble(scenario, Ensemble(config, n_features, n_classes), pair);
    }
    case Scenario::hyb_htnb: {
      config.size = 2;
      config.slot_learners = {LearnerKind::hoeffding_tree, LearnerKind::naive_bayes};
      config.aggregation = Aggregation::wmv;
      config.bagging_lambda = 0.0;
      return ScenarioEnsemble(scenario, Ensemble(config, n_features, n_classes));
    }
  }
  throw ConfigError("unknown scenario");
}

}  // namespace geovote
