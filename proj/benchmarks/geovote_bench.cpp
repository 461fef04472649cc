#include <benchmark/benchmark.h>

#include <vector>

#include "geovote/geometry.hpp"
#include "geovote/learners.hpp"
#include "geovote/rng.hpp"
#include "geovote/streams.hpp"
#include "geovote/verification.hpp"
#include "geovote/weights.hpp"

using namespace geovote;

namespace {

void BM_Centroid(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t p = 8;
  Rng rng(1);
  std::vector<ScoreVector> rows;
  for (std::size_t j = 0; j < m; ++j) rows.push_back(random_score_vector(rng, p));
  for (auto _ : state) benchmark::DoNotOptimize(centroid(rows));
}
BENCHMARK(BM_Centroid)->RangeMultiplier(2)->Range(2, 128);

// Rebuild from a 500-instance window and solve, as one wmv refresh does.
void BM_RefreshWeights(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const std::size_t p = 8, n = 500;
  Rng rng(2);
  std::vector<double> block(m * n * p);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = rng.below(p);
  for (std::size_t q = 0; q < m; ++q)
    for (std::size_t i = 0; i < n; ++i) {
      const auto s = random_score_vector(rng, p);
      for (std::size_t k = 0; k < p; ++k) block[q * n * p + i * p + k] = s[k];
    }
  for (auto _ : state) {
    const auto sys = NormalSystem::from_score_rows(m, p, block, labels);
    benchmark::DoNotOptimize(solve(sys, WeightMode::simplex));
  }
}
BENCHMARK(BM_RefreshWeights)->RangeMultiplier(2)->Range(2, 128)->Unit(benchmark::kMicrosecond);

void BM_HoeffdingTreeTrain(benchmark::State& state) {
  StreamSpec spec;
  spec.n_classes = 4;
  auto stream = make_stream(spec);
  std::vector<StreamRecord> records;
  for (int i = 0; i < 20000; ++i) records.push_back(*stream->next());
  for (auto _ : state) {
    HoeffdingTree tree(spec.n_features, spec.n_classes);
    for (const auto& r : records) tree.train_one(r);
    benchmark::DoNotOptimize(tree.score(records.front().features));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(records.size()));
}
BENCHMARK(BM_HoeffdingTreeTrain)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
