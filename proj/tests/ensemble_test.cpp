#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "geovote/ensemble.hpp"
#include "geovote/error.hpp"
#include "geovote/streams.hpp"
#include "support.hpp"

using namespace geovote;
using Pair = std::pair<std::size_t, std::size_t>;

namespace {

/// Returns a fixed score vector and counts training calls per record.
class Scripted final : public Learner {
 public:
  Scripted(std::vector<double> scores, std::vector<std::uint64_t>* trace = nullptr)
      : scores_(std::move(scores)), trace_(trace) {}

  void train_one(const StreamRecord& record) override {
    ++trained_;
    if (trace_) {
      if (trace_->size() <= record.seq) trace_->resize(record.seq + 1, 0);
      ++(*trace_)[record.seq];
    }
  }
  ScoreVector score(std::span<const double>) const override { return ScoreVector(scores_); }
  void reset() override { trained_ = 0; }
  LearnerKind kind() const noexcept override { return LearnerKind::naive_bayes; }
  std::size_t n_features() const noexcept override { return 1; }
  std::size_t n_classes() const noexcept override { return scores_.size(); }

  std::uint64_t trained() const noexcept { return trained_; }

 private:
  std::vector<double> scores_;
  std::vector<std::uint64_t>* trace_;
  std::uint64_t trained_ = 0;
};

std::vector<std::unique_ptr<Learner>> scripted(std::initializer_list<std::vector<double>> rows) {
  std::vector<std::unique_ptr<Learner>> out;
  for (const auto& r : rows) out.push_back(std::make_unique<Scripted>(r));
  return out;
}

EnsembleConfig config_of(std::size_t m, Aggregation agg, double lambda = 0.0) {
  EnsembleConfig c;
  c.size = m;
  c.aggregation = agg;
  c.bagging_lambda = lambda;
  return c;
}

StreamRecord rec(std::size_t seq, std::size_t label = 0) { return StreamRecord{{0.0}, label, seq}; }

std::vector<bool> bits(Rng& rng, std::size_t n) {
  std::vector<bool> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.below(2) == 1;
  return out;
}

}  // namespace

TEST(EnsembleConfig, Validation) {
  EXPECT_THROW(config_of(1, Aggregation::mv).validate(), ConfigError);
  auto c = config_of(2, Aggregation::mv);
  c.window_length = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config_of(2, Aggregation::mv);
  c.slot_learners = {LearnerKind::naive_bayes};
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(parse_aggregation("median"), ConfigError);
}

TEST(InstanceWindow, EvictsOldestFirst) {
  InstanceWindow w(3);
  for (std::size_t i = 0; i < 5; ++i) w.push(WindowEntry{rec(i), {}});
  EXPECT_EQ(w.size(), 3u);
  EXPECT_TRUE(w.full());
  EXPECT_EQ(w.front().record.seq, 2u);
  EXPECT_EQ(w.back().record.seq, 4u);
  EXPECT_THROW(InstanceWindow(0), ConfigError);
}

TEST(EnsemblePredict, MajorityTieGoesToLowestLabel) {
  Ensemble e(config_of(2, Aggregation::mv), scripted({{1, 0}, {0, 1}}));
  const auto out = e.vote(std::vector{0.0});
  EXPECT_EQ(out.aggregated, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(out.label, 0u);
  EXPECT_EQ(out.votes.size(), 2u);
}

TEST(EnsemblePredict, FixedWeightsSelectAComponent) {
  auto c = config_of(2, Aggregation::wmv);
  c.fixed_weights = std::vector{1.0, 0.0};
  Ensemble e(c, scripted({{0.3, 0.7}, {0.9, 0.1}}));
  EXPECT_EQ(e.vote(std::vector{0.0}).aggregated, (std::vector<double>{0.3, 0.7}));
  e.train_one(rec(0));
  EXPECT_EQ(e.vote(std::vector{0.0}).aggregated, (std::vector<double>{0.3, 0.7}));
}

TEST(EnsemblePredict, IdenticalComponentsAreIdempotent) {
  Ensemble e(config_of(4, Aggregation::mv), scripted({{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}}));
  const auto a = e.vote(std::vector{0.0}).aggregated;
  EXPECT_NEAR(a[0], 0.2, 1e-15);
  EXPECT_NEAR(a[1], 0.3, 1e-15);
  EXPECT_NEAR(a[2], 0.5, 1e-15);
}

TEST(EnsembleTrain, ZeroLambdaTrainsEachComponentOnce) {
  auto comps = scripted({{1, 0}, {0, 1}, {0.5, 0.5}});
  std::vector<const Scripted*> raw;
  for (const auto& c : comps) raw.push_back(static_cast<const Scripted*>(c.get()));
  Ensemble e(config_of(3, Aggregation::mv, 0.0), std::move(comps));
  for (std::size_t i = 0; i < 250; ++i) e.train_one(rec(i));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(raw[j]->trained(), 250u);
    EXPECT_EQ(e.replications(j), 250u);
  }
}

TEST(EnsembleTrain, PoissonReplicationMean) {
  Ensemble e(config_of(2, Aggregation::mv, 6.0), scripted({{1, 0}, {0, 1}}));
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) e.train_one(rec(i));
  for (std::size_t j = 0; j < 2; ++j) {
    EXPECT_NEAR(static_cast<double>(e.replications(j)) / n, 6.0, 0.1);
  }

  Rng rng(12);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(rng.poisson(6.0));
    sum += k;
    sq += k * k;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 6.0, 0.1);
  EXPECT_NEAR(sq / n - mean * mean, 6.0, 0.2);
}

TEST(EnsembleTrain, ComponentsUseIndependentStreams) {
  std::vector<std::uint64_t> t0, t1;
  std::vector<std::unique_ptr<Learner>> comps;
  comps.push_back(std::make_unique<Scripted>(std::vector{1.0, 0.0}, &t0));
  comps.push_back(std::make_unique<Scripted>(std::vector{0.0, 1.0}, &t1));
  Ensemble e(config_of(2, Aggregation::mv, 1.0), std::move(comps));
  for (std::size_t i = 0; i < 200; ++i) e.train_one(rec(i));
  t0.resize(200, 0);
  t1.resize(200, 0);
  EXPECT_NE(t0, t1);
}

TEST(EnsembleTrain, RunsAreReproducibleAndSeedDependent) {
  const auto trace_for = [](std::uint64_t seed, std::uint64_t run_id) {
    std::vector<std::uint64_t> t;
    std::vector<std::unique_ptr<Learner>> comps;
    comps.push_back(std::make_unique<Scripted>(std::vector{1.0, 0.0}, &t));
    comps.push_back(std::make_unique<Scripted>(std::vector{0.0, 1.0}));
    auto c = config_of(2, Aggregation::mv, 6.0);
    c.seed = seed;
    c.run_id = run_id;
    Ensemble e(c, std::move(comps));
    for (std::size_t i = 0; i < 100; ++i) e.train_one(rec(i));
    return t;
  };
  EXPECT_EQ(trace_for(1, 0), trace_for(1, 0));
  EXPECT_NE(trace_for(1, 0), trace_for(2, 0));
  EXPECT_NE(trace_for(1, 0), trace_for(1, 1));
}

TEST(EnsembleTrain, RejectsArityMismatch) {
  Ensemble e(config_of(2, Aggregation::mv), 3, 2);
  EXPECT_THROW(e.train_one(StreamRecord{{1.0, 2.0}, 0, 0}), DimensionError);
  EXPECT_THROW(e.train_one(StreamRecord{{1.0, 2.0, 3.0}, 7, 0}), DimensionError);
}

TEST(EnsembleTrain, WindowKeepsPredictionTimeScores) {
  StreamSpec spec;
  spec.seed = 3;
  RbfGenerator stream(spec);
  auto c = config_of(3, Aggregation::wmv, 6.0);
  c.window_length = 20;
  Ensemble e(c, spec.n_features, spec.n_classes);
  for (int i = 0; i < 300; ++i) {
    const auto r = *stream.next();
    const auto pred = e.vote(r.features);
    e.train_one(r);
    ASSERT_LE(e.window().size(), 20u);
    ASSERT_EQ(e.window().back().votes, pred.votes);
    ASSERT_EQ(e.window().back().record.seq, r.seq);
  }
}

TEST(EnsembleTrain, UniformWeightsUntilFirstSolve) {
  auto c = config_of(2, Aggregation::wmv);
  c.refresh_period = 5;
  Ensemble e(c, scripted({{0.9, 0.1}, {0.2, 0.8}}));
  for (std::size_t i = 0; i < 4; ++i) {
    e.train_one(rec(i));
    EXPECT_FALSE(e.last_solution());
    EXPECT_EQ(e.weights()[0], 0.5);
  }
  e.train_one(rec(4));
  ASSERT_TRUE(e.last_solution());
  EXPECT_GT(e.weights()[0], e.weights()[1]);
}

TEST(EnsembleProperty, MajorityEqualsUniformWeightedVote) {
  StreamSpec spec;
  spec.seed = 21;
  spec.n_classes = 4;
  auto mv_config = config_of(5, Aggregation::mv, 6.0);
  auto wmv_config = config_of(5, Aggregation::wmv, 6.0);
  wmv_config.fixed_weights = std::vector<double>(5, 0.2);
  Ensemble mv(mv_config, spec.n_features, spec.n_classes);
  Ensemble wmv(wmv_config, spec.n_features, spec.n_classes);
  RbfGenerator stream(spec);
  for (int i = 0; i < 3000; ++i) {
    const auto r = *stream.next();
    const auto a = mv.vote(r.features);
    const auto b = wmv.vote(r.features);
    for (std::size_t k = 0; k < 4; ++k) ASSERT_NEAR(a.aggregated[k], b.aggregated[k], 1e-12);
    mv.train_one(r);
    wmv.train_one(r);
  }
}

TEST(EnsembleProperty, RawWeightsBeatBestComponentOnTheWindow) {
  StreamSpec spec;
  spec.seed = 22;
  spec.n_classes = 3;
  auto c = config_of(6, Aggregation::wmv, 6.0);
  c.weight_mode = WeightMode::raw;
  c.window_length = 40;
  Ensemble e(c, spec.n_features, spec.n_classes);
  RbfGenerator stream(spec);
  for (int i = 0; i < 1500; ++i) {
    const auto r = *stream.next();
    e.vote(r.features);
    e.train_one(r);
    if (i % 50 != 49) continue;
    const auto& w = e.weights();
    double ensemble_sse = 0.0;
    std::vector<double> component_sse(6, 0.0);
    for (const auto& entry : e.window()) {
      const auto o = geovote::testing::one_hot(3, entry.record.label);
      const auto b = weighted_centroid(entry.votes, w);
      for (std::size_t k = 0; k < 3; ++k) {
        ensemble_sse += (b[k] - o[k]) * (b[k] - o[k]);
        for (std::size_t j = 0; j < 6; ++j) component_sse[j] += (entry.votes[j][k] - o[k]) * (entry.votes[j][k] - o[k]);
      }
    }
    ASSERT_LE(ensemble_sse, *std::min_element(component_sse.begin(), component_sse.end()) + 1e-9);
  }
}

// Diversity -------------------------------------------------------------------

TEST(QStatistic, Examples) {
  const std::vector<bool> a{true, true, false, true, false};
  EXPECT_EQ(q_statistic(a, a), 1.0);
  std::vector<bool> complement;
  for (bool b : a) complement.push_back(!b);
  EXPECT_EQ(q_statistic(a, complement), -1.0);

  std::vector<bool> r, s;
  const auto add = [&](bool x, bool y, int n) {
    for (int i = 0; i < n; ++i) {
      r.push_back(x);
      s.push_back(y);
    }
  };
  add(true, true, 40);
  add(false, false, 30);
  add(false, true, 20);
  add(true, false, 10);
  const double expected = (40.0 * 30 - 20.0 * 10) / (40.0 * 30 + 20.0 * 10);
  EXPECT_NEAR(*q_statistic(r, s), expected, 1e-15);
  EXPECT_NEAR(*q_statistic(r, s), 0.714285, 1e-6);
}

TEST(QStatistic, UndefinedAndErrors) {
  const std::vector<bool> all_true(10, true);
  EXPECT_FALSE(q_statistic(all_true, all_true).has_value());
  EXPECT_THROW(q_statistic(all_true, std::vector<bool>(9, true)), DimensionError);
}

TEST(QStatistic, MatchesContingencyOracleAndIsSymmetric) {
  Rng rng(50);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(200);
    const auto a = bits(rng, n), b = bits(rng, n);
    long n11 = 0, n00 = 0, n10 = 0, n01 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      n11 += a[i] && b[i];
      n00 += !a[i] && !b[i];
      n10 += a[i] && !b[i];
      n01 += !a[i] && b[i];
    }
    const long den = n11 * n00 + n01 * n10;
    const auto q = q_statistic(a, b);
    if (den == 0) {
      ASSERT_FALSE(q.has_value());
    } else {
      ASSERT_EQ(*q, static_cast<double>(n11 * n00 - n01 * n10) / static_cast<double>(den));
    }
    ASSERT_EQ(q, q_statistic(b, a));
  }
}

TEST(PairSelection, Examples) {
  Rng rng(51);
  const auto a = bits(rng, 30);
  EXPECT_EQ(select_most_diverse_pair({a, bits(rng, 30)}), (Pair{0, 1}));

  std::vector<bool> complement;
  for (bool b : a) complement.push_back(!b);
  EXPECT_EQ(select_most_diverse_pair({a, a, complement}), (Pair{0, 2}));

  EXPECT_THROW(select_most_diverse_pair({a}), ConfigError);
  EXPECT_THROW(select_most_diverse_pair({{}, {}}), DimensionError);
}

TEST(PairSelection, TiesGoToTheSmallestPair) {
  const std::vector<bool> a{true, false, true, false};
  EXPECT_EQ(select_most_diverse_pair({a, a, a, a}), (Pair{0, 1}));
}

TEST(PairSelection, MatchesBruteForce) {
  Rng rng(52);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<std::vector<bool>> pool;
    for (int j = 0; j < 10; ++j) pool.push_back(bits(rng, n));
    std::pair<std::size_t, std::size_t> best{0, 1};
    double best_q = 2.0;
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t s = r + 1; s < 10; ++s) {
        const double q = q_statistic(pool[r], pool[s]).value_or(0.0);
        if (q < best_q) {
          best_q = q;
          best = {r, s};
        }
      }
    }
    ASSERT_EQ(select_most_diverse_pair(pool), best);
  }
}

TEST(QMatrix, SymmetricWithUnitDiagonal) {
  Rng rng(53);
  std::vector<std::vector<bool>> pool;
  for (int j = 0; j < 6; ++j) pool.push_back(bits(rng, 40));
  const auto q = q_matrix(pool);
  for (std::size_t r = 0; r < 6; ++r) {
    EXPECT_EQ(q[r][r], 1.0);
    for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(q[r][s], q[s][r]);
  }
}

// Scenarios -------------------------------------------------------------------

TEST(Scenario, LevBagDefaults) {
  auto s = build_scenario(Scenario::levbag_m, ScenarioParams{}, 4, 2);
  EXPECT_EQ(s.active().size(), 2u);
  EXPECT_EQ(s.active().config().bagging_lambda, 6.0);
  EXPECT_EQ(s.active().config().aggregation, Aggregation::mv);
  EXPECT_EQ(s.active().component(0).kind(), LearnerKind::hoeffding_tree);
}

TEST(Scenario, HybridIsHeterogeneous) {
  auto s = build_scenario(Scenario::hyb_htnb, ScenarioParams{}, 3, 2);
  ASSERT_EQ(s.active().size(), 2u);
  EXPECT_NE(s.active().component(0).kind(), s.active().component(1).kind());
  EXPECT_EQ(s.active().config().bagging_lambda, 0.0);
  EXPECT_EQ(s.active().config().aggregation, Aggregation::wmv);
  EXPECT_EQ(s.active().config().window_length, 100u);
}

TEST(Scenario, Sel2DivSelectsOncePoolWindowFills) {
  StreamSpec spec;
  spec.kind = StreamKind::sea;
  spec.seed = 4;
  SeaGenerator stream(spec);
  auto s = build_scenario(Scenario::sel2div, ScenarioParams{}, 3, 2);
  EXPECT_EQ(s.instantiated_components(), 10u);
  for (int i = 0; i < 99; ++i) s.train_one(*stream.next());
  EXPECT_FALSE(s.selection());
  EXPECT_EQ(s.active().size(), 10u);
  s.train_one(*stream.next());
  ASSERT_TRUE(s.selection());
  const auto& sel = *s.selection();
  EXPECT_LT(sel.pair.first, sel.pair.second);
  EXPECT_LT(sel.pair.second, 10u);
  EXPECT_EQ(sel.at_instance, 100u);
  ASSERT_EQ(sel.q_matrix.size(), 10u);
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_EQ(sel.q_matrix[r][r], 1.0);
    for (std::size_t c = 0; c < 10; ++c) EXPECT_EQ(sel.q_matrix[r][c], sel.q_matrix[c][r]);
  }
  EXPECT_EQ(s.active().size(), 2u);
  EXPECT_EQ(s.active().config().aggregation, Aggregation::wmv);
  EXPECT_EQ(s.active().window().size(), 100u);
  EXPECT_TRUE(s.active().last_solution());

  const auto pair = sel.pair;
  for (int i = 0; i < 500; ++i) s.train_one(*stream.next());
  EXPECT_EQ(s.selection()->pair, pair);
}

TEST(Scenario, InvalidParams) {
  ScenarioParams p;
  p.pool_size = 1;
  EXPECT_THROW(build_scenario(Scenario::sel2div, p, 3, 2), ConfigError);
  p = ScenarioParams{};
  p.m = 1;
  EXPECT_THROW(build_scenario(Scenario::levbag_m, p, 3, 2), ConfigError);
  EXPECT_THROW(parse_scenario("bagging"), ConfigError);
}
