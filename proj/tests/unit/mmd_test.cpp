#include "mmdalign/mmd.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace mmdalign;

namespace {

std::vector<double> ten_bandwidths() {
  std::vector<double> bw;
  for (int e = -3; e <= 6; ++e) bw.push_back(std::ldexp(1.0, e));
  return bw;
}

EmbeddingSpace space_of(const Matrix& m) {
  std::vector<std::string> words;
  for (Index i = 0; i < m.rows(); ++i) words.push_back("w" + std::to_string(i));
  return {Vocabulary(words), m};
}

double pairwise_distance_gap(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = i + 1; j < a.rows(); ++j)
      worst = std::max(worst, std::abs((a.row(i) - a.row(j)).norm() - (b.row(i) - b.row(j)).norm()));
  return worst;
}

TEST(KernelSpec, RejectsBadBandwidths) {
  EXPECT_THROW(KernelSpec({}), ConfigError);
  EXPECT_THROW(KernelSpec({1.0, 0.0}), ConfigError);
  EXPECT_THROW(KernelSpec({-1.0}), ConfigError);
}

TEST(KernelSpec, MedianHeuristicGrid) {
  Matrix pts(3, 1);
  pts << 0, 1, 3;  // distances 1, 2, 3 -> median 2
  const auto spec = KernelSpec::median_heuristic(pts, 0);
  ASSERT_EQ(spec.size(), 10u);
  EXPECT_DOUBLE_EQ(spec.bandwidths().front(), 0.25);
  EXPECT_DOUBLE_EQ(spec.bandwidths().back(), 128.0);
}

TEST(KernelMatrix, SelfPairSumsAllBandwidths) {
  Matrix a(1, 3);
  a << 0.3, -1.0, 2.0;
  const auto k = kernel_matrix(a, a, KernelSpec(ten_bandwidths()));
  EXPECT_NEAR(k(0, 0), 10.0, 1e-12);
}

TEST(KernelMatrix, ScalarValue) {
  Matrix a(1, 1), b(1, 1);
  a << 0.0;
  b << std::sqrt(2.0);
  EXPECT_NEAR(kernel_matrix(a, b, KernelSpec({1.0}))(0, 0), 0.367879441171442, 1e-12);
}

TEST(KernelMatrix, MatchesOracleSymmetricAndBounded) {
  std::mt19937_64 rng(11);
  const Matrix a = oracle::gaussian(7, 4, rng);
  const Matrix b = oracle::gaussian(5, 4, rng, 0.5);
  const auto bw = ten_bandwidths();
  const KernelSpec spec(bw);
  const Matrix k = kernel_matrix(a, b, spec);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j) {
      EXPECT_NEAR(k(i, j), oracle::kernel(a, i, b, j, bw), 1e-12);
      EXPECT_GT(k(i, j), 0.0);
      EXPECT_LE(k(i, j), 10.0);
    }
  }
  EXPECT_LE((k - kernel_matrix(b, a, spec).transpose()).norm(), 1e-14);
}

TEST(Mmd2Batch, IdenticalBatchesGiveZero) {
  std::mt19937_64 rng(2);
  const Matrix a = oracle::gaussian(32, 5, rng);
  EXPECT_LE(std::abs(mmd2_batch(a, a, KernelSpec(ten_bandwidths()))), 1e-9);
}

TEST(Mmd2Batch, SinglePairClosedForm) {
  Matrix a(1, 1), b(1, 1);
  a << 0.0;
  b << std::sqrt(2.0);
  EXPECT_NEAR(mmd2_batch(a, b, KernelSpec({1.0})), 2.0 - 2.0 * std::exp(-1.0), 1e-12);
  EXPECT_NEAR(2.0 - 2.0 * std::exp(-1.0), 1.264241, 1e-6);
}

TEST(Mmd2Batch, MatchesOracle) {
  std::mt19937_64 rng(4);
  const auto bw = ten_bandwidths();
  for (int t = 0; t < 5; ++t) {
    const Matrix x = oracle::gaussian(9, 3, rng);
    const Matrix y = oracle::gaussian(9, 3, rng, 1.0);
    EXPECT_NEAR(mmd2_batch(x, y, KernelSpec(bw)), oracle::mmd2(x, y, bw), 1e-11);
  }
}

TEST(Mmd2Batch, NonnegativeOnRandomPairs) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  const KernelSpec spec(ten_bandwidths());
  for (int t = 0; t < 1000; ++t) {
    const Matrix x = oracle::gaussian(6, 3, rng);
    const Matrix y = oracle::gaussian(6, 3, rng, shift(rng));
    ASSERT_GE(mmd2_batch(x, y, spec), -1e-9) << "pair " << t;
  }
}

TEST(Mmd2Batch, SeparatesDistributions) {
  std::mt19937_64 rng(2024);
  const Matrix x = oracle::gaussian(512, 10, rng);
  const Matrix same = oracle::gaussian(512, 10, rng);
  const Matrix shifted = oracle::gaussian(512, 10, rng, 3.0);
  const auto spec = KernelSpec::median_heuristic(x, 1);
  EXPECT_LE(mmd2_batch(x, same, spec), 0.05);
  EXPECT_GE(mmd2_batch(x, shifted, spec), 0.5);
}

TEST(Mmd2Batch, RowPermutationInvariant) {
  std::mt19937_64 rng(8);
  const Matrix x = oracle::gaussian(20, 4, rng);
  const Matrix y = oracle::gaussian(20, 4, rng, 0.3);
  std::vector<Index> perm(20);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const KernelSpec spec(ten_bandwidths());
  const double base = mmd2_batch(x, y, spec);
  EXPECT_NEAR(mmd2_batch(gather_rows(x, perm), y, spec), base, 1e-10);
  EXPECT_NEAR(mmd2_batch(x, gather_rows(y, perm), spec), base, 1e-10);
}

TEST(Mmd2Batch, RejectsUnequalBatches) {
  EXPECT_THROW(mmd2_batch(Matrix::Zero(2, 3), Matrix::Zero(3, 3), KernelSpec({1.0})), Error);
  EXPECT_THROW(mmd2_batch(Matrix::Zero(2, 3), Matrix::Zero(2, 2), KernelSpec({1.0})), Error);
}

double max_relative_error(const Matrix& analytic, const Matrix& w, const Matrix& x, const Matrix& y,
                          const Projector& proj, const std::vector<double>& bw) {
  double worst = 0.0;
  for (Index r = 0; r < w.rows(); ++r) {
    for (Index c = 0; c < w.cols(); ++c) {
      const double fd = oracle::objective_partial(w, r, c, x, y, proj.basis, proj.offset, bw);
      const double denom = std::max({std::abs(fd), std::abs(analytic(r, c)), 1e-6});
      worst = std::max(worst, std::abs(fd - analytic(r, c)) / denom);
    }
  }
  return worst;
}

TEST(Mmd2Gradient, MatchesFiniteDifferencesIdentityProjector) {
  std::mt19937_64 rng(13);
  const Matrix w = oracle::rotation(6, rng) + 0.05 * oracle::gaussian(6, 6, rng);
  const Matrix x = oracle::gaussian(8, 6, rng);
  const Matrix y = oracle::gaussian(8, 6, rng, 0.4);
  const auto bw = ten_bandwidths();
  const auto proj = Projector::identity(6);
  const auto g = mmd2_gradient({w}, x, y, proj, KernelSpec(bw));
  EXPECT_LE(max_relative_error(g, w, x, y, proj, bw), 1e-4);
}

TEST(Mmd2Gradient, MatchesFiniteDifferencesWithCompression) {
  std::mt19937_64 rng(17);
  const Matrix tgt = oracle::gaussian(40, 7, rng);
  const auto proj = fit_projector(space_of(tgt), 3).projector;
  const Matrix w = oracle::rotation(7, rng);
  const Matrix x = oracle::gaussian(10, 7, rng);
  const Matrix y = tgt.topRows(10);
  const std::vector<double> bw = {0.5, 1.0, 2.0, 4.0};
  const auto g = mmd2_gradient({w}, x, y, proj, KernelSpec(bw));
  EXPECT_LE(max_relative_error(g, w, x, y, proj, bw), 1e-4);
}

TEST(Mmd2Gradient, ValueMatchesBatchEstimate) {
  std::mt19937_64 rng(19);
  const Matrix w = oracle::rotation(5, rng);
  const Matrix x = oracle::gaussian(12, 5, rng);
  const Matrix y = oracle::gaussian(12, 5, rng, 0.2);
  const KernelSpec spec(ten_bandwidths());
  const auto out = mmd2_value_and_gradient({w}, x, y, Projector::identity(5), spec);
  EXPECT_NEAR(out.value, mmd2_batch(x * w, y, spec), 1e-12);
}

TEST(Mmd2Gradient, VanishesAtStationaryMinimum) {
  std::mt19937_64 rng(23);
  const Matrix w = oracle::rotation(6, rng);
  const Matrix x = Matrix::Ones(8, 1) * oracle::gaussian(1, 6, rng);
  const Matrix y = x * w;
  const auto g = mmd2_gradient({w}, x, y, Projector::identity(6), KernelSpec(ten_bandwidths()));
  EXPECT_LE(g.norm(), 1e-8);
}

TEST(Mmd2Gradient, FlattensForHugeBandwidth) {
  std::mt19937_64 rng(13);
  const Matrix w = oracle::rotation(6, rng);
  const Matrix x = oracle::gaussian(8, 6, rng);
  const Matrix y = oracle::gaussian(8, 6, rng, 0.4);
  const auto g = mmd2_gradient({w}, x, y, Projector::identity(6), KernelSpec({1e6}));
  EXPECT_LE(g.norm(), 1e-9);
}

TEST(Projector, IdentityCompressIsNoOp) {
  std::mt19937_64 rng(29);
  const Matrix m = oracle::gaussian(5, 4, rng);
  EXPECT_EQ(compress(m, Projector::identity(4)), m);
  EXPECT_THROW(compress(m, Projector::identity(3)), Error);
}

TEST(Projector, FullRankFitIsARotation) {
  std::mt19937_64 rng(31);
  const Matrix m = oracle::gaussian(60, 6, rng, 1.5);
  const auto fit = fit_projector(space_of(m), 6);
  const Matrix& p = fit.projector.basis;
  EXPECT_LE((p * p.transpose() - Matrix::Identity(6, 6)).norm(), 1e-6);
  EXPECT_LE(pairwise_distance_gap(m, compress(m, fit.projector)), 1e-6);
  EXPECT_FALSE(fit.rank_deficient);
}

TEST(Projector, CompressedColumnsAreCentered) {
  std::mt19937_64 rng(37);
  const Matrix m = oracle::gaussian(50, 8, rng, 3.0);
  const auto proj = fit_projector(space_of(m), 4).projector;
  EXPECT_LE(compress(m, proj).colwise().mean().cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Projector, LosslessOnLowRankData) {
  std::mt19937_64 rng(41);
  const Matrix m = oracle::gaussian(40, 3, rng) * oracle::gaussian(3, 9, rng);
  const auto proj = fit_projector(space_of(m), 3).projector;
  EXPECT_LE(pairwise_distance_gap(m, compress(m, proj)), 1e-6);
}

TEST(Projector, FlagsRankDeficiency) {
  std::mt19937_64 rng(43);
  const Matrix m = oracle::gaussian(40, 2, rng) * oracle::gaussian(2, 6, rng);
  const auto fit = fit_projector(space_of(m), 4);
  EXPECT_TRUE(fit.rank_deficient);
  const Matrix& p = fit.projector.basis;
  EXPECT_LE((p * p.transpose() - Matrix::Identity(4, 4)).norm(), 1e-6);
}

TEST(Projector, CompressionNeverStretchesDistances) {
  std::mt19937_64 rng(47);
  const Matrix m = oracle::gaussian(30, 10, rng);
  const auto proj = fit_projector(space_of(m), 4).projector;
  const Matrix c = compress(m, proj);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = i + 1; j < m.rows(); ++j)
      EXPECT_LE((c.row(i) - c.row(j)).norm(), (m.row(i) - m.row(j)).norm() + 1e-12);
}

// Signal and noise scaled so the planted part carries 10x the RMS norm of the
// isotropic noise.
TEST(Projector, CapturesPlantedSubspace) {
  std::mt19937_64 rng(53);
  const Index n = 2000, d = 300, p = 50;
  const Matrix basis = oracle::rotation(d, rng).leftCols(p).transpose();
  const Matrix signal = oracle::gaussian(n, p, rng) * basis;
  const double noise_sd = std::sqrt(static_cast<double>(p) / 100.0 / static_cast<double>(d));
  const Matrix m = signal + oracle::gaussian(n, d, rng, 0.0, noise_sd);
  const auto fit = fit_projector(space_of(m), p);
  EXPECT_GE(fit.explained_variance, 0.99);
}

TEST(Projector, RejectsBadDimension) {
  const Matrix m = Matrix::Identity(4, 4);
  EXPECT_THROW(fit_projector(space_of(m), 0), ConfigError);
  EXPECT_THROW(fit_projector(space_of(m), 5), ConfigError);
}

}  // namespace
