#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"
#include "mmdalign/lexicon.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mmdalign {

struct BucketReport {
  Index cutoff = 20000;
  std::optional<double> common_p_at_1;  // source rank < cutoff; absent when empty
  std::optional<double> rare_p_at_1;
  Index n_common = 0;
  Index n_rare = 0;
};

struct BliReport {
  double p_at_1 = 0.0;
  double p_at_5 = 0.0;
  Index n_evaluated = 0;
  Index n_skipped_oov = 0;
  BucketReport buckets;
};

/// Bilingual lexicon induction accuracy. Every distinct gold source word is
/// scored once: a hit at k if any of its in-vocabulary gold translations is
/// among the top-k retrieved targets. Source words that are out of
/// vocabulary, or whose translations all are, count as skipped. Retrieval
/// runs over the whole target vocabulary; CSLS neighborhoods use the top
/// `cfg.dict_vocab` mapped source words. Throws Error when every gold word is
/// skipped.
BliReport bli_accuracy(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const Lexicon& gold, const RetrievalConfig& cfg, Index bucket_cutoff = 20000);

/// P@1 split by source rank < cutoff (common) vs >= cutoff (rare).
BucketReport frequency_bucket_report(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                     const Lexicon& gold, const RetrievalConfig& cfg, Index cutoff = 20000);

/// Sample Pearson correlation. Throws Error on length mismatch, fewer than two
/// values, or zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

struct SimilarityPair {
  std::string source;
  std::string target;
  double score = 0.0;
};

/// Three whitespace-separated columns per line: "src tgt score".
std::vector<SimilarityPair> load_similarity_pairs(const std::filesystem::path& path, std::size_t* skipped = nullptr);

struct SimilarityReport {
  double pearson_r = 0.0;
  Index n_used = 0;
  Index n_skipped_oov = 0;
};

/// Pearson r between cos(x_src W, y_tgt) and the human scores over the
/// in-vocabulary pairs.
SimilarityReport word_similarity(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                 const std::vector<SimilarityPair>& pairs);

/// Mean cosine between each of the `k_words` most frequent mapped source
/// words and its CSLS-retrieved target among the `k_words` most frequent
/// target words. Higher is better.
double unsupervised_criterion(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                              Index k_words = 10000, Index csls_k = 10);

/// Mean unsupervised_criterion over `samples` Haar-random orthogonal
/// mappings: the score an unaligned mapping gets on these spaces.
double chance_criterion(const EmbeddingSpace& src, const EmbeddingSpace& tgt, std::uint64_t seed, int samples = 3,
                        Index k_words = 10000, Index csls_k = 10);

/// (criterion - chance) / (1 - chance): 0 for an unaligned mapping, 1 for a
/// perfect one.
double normalized_criterion(double criterion, double chance);

}  // namespace mmdalign
