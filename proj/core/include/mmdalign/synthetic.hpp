#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace mmdalign {

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// the sign of R's diagonal folded into Q).
Matrix random_orthogonal(Index d, std::mt19937_64& rng);

struct SyntheticOptions {
  Index n = 3000;
  Index d = 50;
  double noise = 0.01;           // std of the additive Gaussian target noise
  double spectrum_ratio = 10.0;  // largest / smallest per-axis std of the source
  bool shuffle = true;           // permute target rows
  std::uint64_t seed = 0;
  /// Source ranks >= rare_from get noise * rare_noise_scale (no effect when
  /// rare_from >= n).
  Index rare_from = kUnboundedRank;
  double rare_noise_scale = 1.0;

  static constexpr Index kUnboundedRank = Eigen::NumTraits<Index>::highest();
};

/// A source space and a target = source * R + noise, with known ground truth.
struct SyntheticPair {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
  Matrix rotation;             // R
  std::vector<Index> target_of;  // source row i lives at target row target_of[i]
  Lexicon gold;                // s<i> -> t<target_of[i]>

  IndexPairs gold_pairs() const;
};

/// Source rows are drawn from N(0, diag(s)^2) with s geometric from 1 down to
/// 1 / spectrum_ratio. Words are named "s<i>" and "t<j>".
SyntheticPair make_synthetic_pair(const SyntheticOptions& opts);

}  // namespace mmdalign
