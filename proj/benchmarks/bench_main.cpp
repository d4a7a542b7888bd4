#include "mmdalign/initializer.hpp"
#include "mmdalign/lexicon.hpp"
#include "mmdalign/mmd.hpp"
#include "mmdalign/synthetic.hpp"
#include "mmdalign/trainer.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace mmdalign;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

EmbeddingSpace space_of(const Matrix& m) {
  std::vector<std::string> words;
  for (Index i = 0; i < m.rows(); ++i) words.push_back("w" + std::to_string(i));
  return {Vocabulary(words), m};
}

// Args: batch size B, dimension d.
void BM_Mmd2ValueAndGradient(benchmark::State& state) {
  const Index b = state.range(0), d = state.range(1);
  const Matrix x = gaussian(b, d, 1), y = gaussian(b, d, 2);
  std::mt19937_64 rng(3);
  const MappingMatrix w{random_orthogonal(d, rng)};
  const auto spec = KernelSpec::median_heuristic(y, 4);
  const auto proj = Projector::identity(d);
  for (auto _ : state) benchmark::DoNotOptimize(mmd2_value_and_gradient(w, x, y, proj, spec));
  state.SetItemsProcessed(state.iterations() * b * b);
}
BENCHMARK(BM_Mmd2ValueAndGradient)->Args({256, 50})->Args({1280, 50})->Args({1280, 300})->Unit(benchmark::kMillisecond);

void BM_Retraction(benchmark::State& state) {
  const Index d = state.range(0);
  const Matrix w = gaussian(d, d, 5) / std::sqrt(static_cast<double>(d));
  for (auto _ : state) benchmark::DoNotOptimize(orthogonality_retraction(w, 0.01));
}
BENCHMARK(BM_Retraction)->Arg(50)->Arg(300);

// Args: queries / keys, dimension.
void BM_Retrieval(benchmark::State& state) {
  const Index n = state.range(0), d = state.range(1);
  Matrix q = gaussian(n, d, 6), k = gaussian(n, d, 7);
  normalize_rows_inplace(q);
  normalize_rows_inplace(k);
  const auto method = state.range(2) ? RetrievalMethod::kCsls : RetrievalMethod::kNearestNeighbor;
  for (auto _ : state) benchmark::DoNotOptimize(best_matches(q, k, method, 10));
  state.SetLabel(state.range(2) ? "csls" : "nn");
}
BENCHMARK(BM_Retrieval)->Args({5000, 50, 0})->Args({5000, 50, 1})->Args({10000, 300, 1})->Unit(benchmark::kMillisecond);

void BM_SimilaritySignature(benchmark::State& state) {
  const Index cap = state.range(0);
  Matrix m = gaussian(cap, 50, 8);
  normalize_rows_inplace(m);
  const auto space = space_of(m);
  for (auto _ : state) benchmark::DoNotOptimize(similarity_signature(space, cap));
}
BENCHMARK(BM_SimilaritySignature)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

void BM_Procrustes(benchmark::State& state) {
  const Index d = state.range(0);
  const Matrix x = gaussian(5000, d, 9), y = gaussian(5000, d, 10);
  for (auto _ : state) benchmark::DoNotOptimize(procrustes(x, y));
}
BENCHMARK(BM_Procrustes)->Arg(50)->Arg(300)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
