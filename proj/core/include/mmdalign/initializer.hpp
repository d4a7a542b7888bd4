#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"

namespace mmdalign {

struct InitConfig {
  Index vocab_cap = 4000;  // words used for the similarity signatures
  Index csls_k = 10;
  bool use_csls = true;

  /// Throws ConfigError on vocab_cap < 2 or csls_k < 1.
  void validate() const;
};

/// Isometry-invariant per-word signatures of the top `cap` words: rows of the
/// Gram matrix X X^T, each sorted descending and rescaled to unit norm.
///
/// Any rotation X -> X R leaves the result unchanged. Throws ConfigError when
/// cap exceeds the vocabulary size.
Matrix similarity_signature(const EmbeddingSpace& space, Index cap);

/// Best target row for every source signature under cosine (or CSLS when
/// `use_csls`). Shorter signatures are zero-padded to the longer width.
IndexPairs match_signatures(const Matrix& sig_x, const Matrix& sig_y, bool use_csls, Index csls_k);

struct ProcrustesResult {
  MappingMatrix mapping;
  /// Smallest singular value of the cross-covariance fell below 1e-12; the
  /// mapping is still orthogonal but not unique.
  bool degenerate = false;
};

/// Orthogonal W minimizing ||x W - y||_F: W = U V^T with U S V^T = svd(x^T y).
ProcrustesResult procrustes(const Matrix& x_pairs, const Matrix& y_pairs);

/// Procrustes over the rows named by `pairs`.
ProcrustesResult procrustes(const Matrix& src, const Matrix& tgt, const IndexPairs& pairs);

struct InitResult {
  MappingMatrix mapping;
  IndexPairs seed;  // the signature-matched seed dictionary
};

/// Signature matching -> seed dictionary -> Procrustes. Both spaces should be
/// normalized.
InitResult build_initial_mapping(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const InitConfig& cfg);

}  // namespace mmdalign
