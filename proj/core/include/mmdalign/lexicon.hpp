#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mmdalign {

enum class RetrievalMethod { kNearestNeighbor, kCsls };

std::string to_string(RetrievalMethod method);
/// "nn" or "csls"; anything else throws ConfigError.
RetrievalMethod parse_retrieval_method(std::string_view name);

struct RetrievalConfig {
  RetrievalMethod method = RetrievalMethod::kCsls;
  Index csls_k = 10;
  Index dict_vocab = 20000;  // both sides restricted to this many words
  bool mutual_nn = true;
  int refine_iters = 5;

  void validate() const;
};

/// Dense CSLS rescoring of a cosine matrix:
///   csls(i, j) = 2 sim(i, j) - r_row(i) - r_col(j)
/// where r_row(i) is the mean of the k largest entries of row i and r_col(j)
/// the mean of the k largest entries of column j. Requires k <= min(n, m).
Matrix csls_scores(const Matrix& sim, Index k);

/// Mean of the k largest dot products of each query row against `keys`.
/// Computed in row blocks; memory is O(block * keys).
Vector knn_mean_similarity(const Matrix& queries, const Matrix& keys, Index k);

/// Indices of the `n` best keys for every query, best first, under dot-product
/// similarity (NN) or CSLS. For CSLS the keys' neighborhood term is measured
/// against `population` (defaults to the queries themselves). Ties resolve to
/// the lower key index.
std::vector<std::vector<Index>> top_matches(const Matrix& queries, const Matrix& keys, RetrievalMethod method,
                                            Index csls_k, Index n, const Matrix* population = nullptr);

/// Top-1 specialisation of top_matches.
std::vector<Index> best_matches(const Matrix& queries, const Matrix& keys, RetrievalMethod method, Index csls_k,
                                const Matrix* population = nullptr);

/// Rows of src * W, renormalized to unit length.
Matrix map_and_normalize(const Matrix& src, const MappingMatrix& w);

/// Dictionary induced by the mapping over the top `dict_vocab` words of both
/// sides. With mutual_nn only pairs that are each other's best match survive.
/// Sorted by source index.
IndexPairs induce_dictionary(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                             const RetrievalConfig& cfg);

struct RefineResult {
  MappingMatrix mapping;
  int iterations = 0;          // Procrustes solves performed
  bool empty_dictionary = false;
  IndexPairs dictionary;       // last induced dictionary
};

/// Iterative Procrustes refinement: induce_dictionary -> procrustes, up to
/// cfg.refine_iters times, stopping early when the dictionary repeats. An
/// empty dictionary stops with the last valid mapping and sets the flag.
RefineResult refine(const MappingMatrix& w0, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                    const RetrievalConfig& cfg);

}  // namespace mmdalign
