#include "mmdalign/lexicon.hpp"
#include "mmdalign/synthetic.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

using namespace mmdalign;

namespace {

EmbeddingSpace space_of(const Matrix& m) {
  std::vector<std::string> words;
  for (Index i = 0; i < m.rows(); ++i) words.push_back("w" + std::to_string(i));
  return {Vocabulary(words), m};
}

Matrix unit_rows(Matrix m) {
  normalize_rows_inplace(m);
  return m;
}

SyntheticPair normalized_pair(Index n, Index d, double noise, std::uint64_t seed) {
  SyntheticOptions opts;
  opts.n = n;
  opts.d = d;
  opts.noise = noise;
  opts.seed = seed;
  auto syn = make_synthetic_pair(opts);
  syn.src = normalize(syn.src, kDefaultNormalization);
  syn.tgt = normalize(syn.tgt, kDefaultNormalization);
  return syn;
}

double gold_rate(const IndexPairs& pairs, const std::vector<Index>& target_of) {
  double hits = 0;
  for (const auto& [s, t] : pairs) hits += target_of[static_cast<std::size_t>(s)] == t;
  return hits / static_cast<double>(pairs.size());
}

double p_at_1(const SyntheticPair& syn, const Matrix& w) {
  const auto nn = oracle::nearest(syn.src.matrix() * w, syn.tgt.matrix());
  double hits = 0;
  for (std::size_t i = 0; i < nn.size(); ++i) hits += nn[i] == syn.target_of[i];
  return hits / static_cast<double>(nn.size());
}

Index row_argmax(const Matrix& m, Index i) {
  Index arg = 0;
  m.row(i).maxCoeff(&arg);
  return arg;
}

TEST(Csls, ConstantSimilarityIsZero) {
  const Matrix sim = Matrix::Constant(4, 5, 0.37);
  EXPECT_LE(csls_scores(sim, 2).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Csls, HandExample) {
  Matrix sim(3, 3);
  sim << .9, .1, .1, .1, .8, .1, .2, .1, .7;
  const Matrix c = csls_scores(sim, 1);
  EXPECT_LE((c - oracle::csls(sim, 1)).cwiseAbs().maxCoeff(), 1e-15);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(row_argmax(c, i), i);
}

TEST(Csls, EqualMeansKeepCosineArgmax) {
  Matrix sim(3, 3);  // every row and column sums to 1.2
  sim << .6, .4, .2, .2, .6, .4, .4, .2, .6;
  const Matrix c = csls_scores(sim, 3);
  EXPECT_LE((c - (2.0 * sim.array() - 0.8).matrix()).cwiseAbs().maxCoeff(), 1e-15);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(row_argmax(c, i), row_argmax(sim, i));
}

TEST(Csls, MatchesOracle) {
  std::mt19937_64 rng(3);
  const Matrix sim = oracle::gaussian(9, 13, rng);
  for (int k : {1, 4, 9}) EXPECT_LE((csls_scores(sim, k) - oracle::csls(sim, k)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(csls_scores(sim, 10), Error);
  EXPECT_THROW(csls_scores(sim, 0), Error);
}

TEST(KnnMeanSimilarity, MatchesBruteForceAcrossBlocks) {
  std::mt19937_64 rng(5);
  const Matrix q = oracle::gaussian(700, 4, rng);
  const Matrix k = oracle::gaussian(90, 4, rng);
  const Vector got = knn_mean_similarity(q, k, 7);
  const Matrix sim = q * k.transpose();
  for (Index i = 0; i < q.rows(); i += 37) {
    std::vector<double> row;
    for (Index j = 0; j < k.rows(); ++j) row.push_back(sim(i, j));
    std::sort(row.rbegin(), row.rend());
    double mean = 0;
    for (int t = 0; t < 7; ++t) mean += row[static_cast<std::size_t>(t)] / 7.0;
    EXPECT_NEAR(got(i), mean, 1e-12);
  }
}

TEST(Retrieval, NearestNeighborMatchesBruteForce) {
  std::mt19937_64 rng(7);
  const Matrix q = unit_rows(oracle::gaussian(600, 6, rng));
  const Matrix k = unit_rows(oracle::gaussian(80, 6, rng));
  const auto best = best_matches(q, k, RetrievalMethod::kNearestNeighbor, 10);
  const auto top = top_matches(q, k, RetrievalMethod::kNearestNeighbor, 10, 5);
  const auto nn = oracle::nearest(q, k);
  for (std::size_t i = 0; i < nn.size(); ++i) {
    EXPECT_EQ(best[i], nn[i]);
    ASSERT_EQ(top[i].size(), 5u);
    EXPECT_EQ(top[i][0], nn[i]);
  }
}

TEST(Retrieval, CslsMatchesDenseDefinition) {
  std::mt19937_64 rng(9);
  const Matrix q = unit_rows(oracle::gaussian(40, 5, rng));
  const Matrix k = unit_rows(oracle::gaussian(30, 5, rng));
  const Matrix dense = oracle::csls(q * k.transpose(), 4);
  const auto best = best_matches(q, k, RetrievalMethod::kCsls, 4);
  const auto top = top_matches(q, k, RetrievalMethod::kCsls, 4, 3);
  for (Index i = 0; i < q.rows(); ++i) {
    EXPECT_EQ(best[static_cast<std::size_t>(i)], row_argmax(dense, i));
    EXPECT_EQ(top[static_cast<std::size_t>(i)][0], row_argmax(dense, i));
    for (std::size_t r = 1; r < 3; ++r) {
      EXPECT_GE(dense(i, top[static_cast<std::size_t>(i)][r - 1]), dense(i, top[static_cast<std::size_t>(i)][r]));
    }
  }
}

TEST(Retrieval, TiesGoToLowerIndex) {
  Matrix q(1, 2), k(3, 2);
  q << 1, 0;
  k << 0, 1, 1, 0, 1, 0;
  EXPECT_EQ(best_matches(q, k, RetrievalMethod::kNearestNeighbor, 1)[0], 1);
  EXPECT_EQ(top_matches(q, k, RetrievalMethod::kNearestNeighbor, 1, 3)[0], (std::vector<Index>{1, 2, 0}));
}

TEST(RetrievalConfig, ValidatesAndParses) {
  RetrievalConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.csls_k = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.refine_iters = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(parse_retrieval_method("nn"), RetrievalMethod::kNearestNeighbor);
  EXPECT_EQ(parse_retrieval_method("csls"), RetrievalMethod::kCsls);
  EXPECT_THROW(parse_retrieval_method("cosine"), ConfigError);
}

TEST(InduceDictionary, IdenticalSpacesGiveIdentityPairs) {
  std::mt19937_64 rng(11);
  const auto space = space_of(unit_rows(oracle::gaussian(100, 8, rng)));
  const auto pairs = induce_dictionary(MappingMatrix::identity(8), space, space, {});
  ASSERT_EQ(pairs.size(), 100u);
  for (Index i = 0; i < 100; ++i) EXPECT_EQ(pairs[static_cast<std::size_t>(i)], std::make_pair(i, i));
}

TEST(InduceDictionary, ExactRotation) {
  const auto syn = normalized_pair(400, 12, 0.0, 13);
  const auto pairs = induce_dictionary({syn.rotation}, syn.src, syn.tgt, {});
  EXPECT_EQ(pairs.size(), 400u);
  EXPECT_EQ(gold_rate(pairs, syn.target_of), 1.0);
}

TEST(InduceDictionary, NoisyRotationMostlyGold) {
  const auto syn = normalized_pair(1000, 30, 0.01, 17);
  const auto pairs = induce_dictionary({syn.rotation}, syn.src, syn.tgt, {});
  ASSERT_FALSE(pairs.empty());
  EXPECT_GE(gold_rate(pairs, syn.target_of), 0.90);
}

TEST(InduceDictionary, MutualIsForwardBackwardIntersection) {
  std::mt19937_64 rng(19);
  const auto src = space_of(unit_rows(oracle::gaussian(150, 6, rng)));
  const auto tgt = space_of(unit_rows(oracle::gaussian(120, 6, rng)));
  const MappingMatrix w{oracle::rotation(6, rng)};
  for (auto method : {RetrievalMethod::kNearestNeighbor, RetrievalMethod::kCsls}) {
    RetrievalConfig cfg;
    cfg.method = method;
    cfg.mutual_nn = false;
    const auto forward = induce_dictionary(w, src, tgt, cfg);
    const Matrix mapped = map_and_normalize(src.matrix(), w);
    const auto backward = best_matches(tgt.matrix(), mapped, method, cfg.csls_k);
    std::set<std::pair<Index, Index>> expected;
    for (const auto& [s, t] : forward) {
      if (backward[static_cast<std::size_t>(t)] == s) expected.insert({s, t});
    }
    cfg.mutual_nn = true;
    const auto mutual = induce_dictionary(w, src, tgt, cfg);
    const std::set<std::pair<Index, Index>> got(mutual.begin(), mutual.end());
    EXPECT_EQ(got, expected);
    EXPECT_TRUE(std::is_sorted(mutual.begin(), mutual.end()));
  }
}

TEST(InduceDictionary, RespectsDictVocab) {
  std::mt19937_64 rng(23);
  const auto space = space_of(unit_rows(oracle::gaussian(100, 8, rng)));
  RetrievalConfig cfg;
  cfg.dict_vocab = 30;
  const auto pairs = induce_dictionary(MappingMatrix::identity(8), space, space, cfg);
  EXPECT_EQ(pairs.size(), 30u);
  for (const auto& [s, t] : pairs) EXPECT_LT(std::max(s, t), 30);
}

TEST(Refine, FixedPointAtTrueRotation) {
  const auto syn = normalized_pair(500, 15, 0.0, 29);
  const auto out = refine({syn.rotation}, syn.src, syn.tgt, {});
  EXPECT_LE((out.mapping.w - syn.rotation).norm(), 1e-6);
  EXPECT_FALSE(out.empty_dictionary);
}

TEST(Refine, ImprovesPerturbedStart) {
  const auto syn = normalized_pair(1000, 30, 0.01, 31);
  std::mt19937_64 rng(31);
  const Matrix w0 = syn.rotation + 0.1 * oracle::gaussian(30, 30, rng) / std::sqrt(30.0);
  const auto out = refine({w0}, syn.src, syn.tgt, {});
  EXPECT_GE(p_at_1(syn, out.mapping.w), p_at_1(syn, w0));
  EXPECT_LE(out.mapping.orthogonality_defect(), 1e-8);
  EXPECT_GE(out.iterations, 1);
}

TEST(Refine, ZeroIterationsReturnsInput) {
  const auto syn = normalized_pair(100, 5, 0.01, 37);
  RetrievalConfig cfg;
  cfg.refine_iters = 0;
  const Matrix w0 = 1.3 * syn.rotation;
  const auto out = refine({w0}, syn.src, syn.tgt, cfg);
  EXPECT_EQ(out.mapping.w, w0);
  EXPECT_EQ(out.iterations, 0);
}

TEST(Refine, OrthogonalOutputFromSkewedInput) {
  const auto syn = normalized_pair(300, 10, 0.01, 41);
  std::mt19937_64 rng(41);
  const Matrix w0 = syn.rotation + 0.3 * oracle::gaussian(10, 10, rng);
  const auto out = refine({w0}, syn.src, syn.tgt, {});
  EXPECT_LE(out.mapping.orthogonality_defect(), 1e-8);
}

}  // namespace
