#pragma once

#include "mmdalign/common.hpp"

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mmdalign {

/// Frequency-ordered word list; rank 0 is the most frequent word.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  /// Appends `word` if absent. Returns false for a duplicate.
  bool add(std::string word);

  std::optional<Index> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::string& word(Index rank) const { return words_.at(static_cast<std::size_t>(rank)); }
  const std::vector<std::string>& words() const { return words_; }
  Index size() const { return static_cast<Index>(words_.size()); }

  /// The first `n` words.
  Vocabulary prefix(Index n) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, Index> index_;
};

/// A vocabulary paired with one embedding row per word.
///
/// Immutable once built; share it by const reference.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  /// Throws Error when the row count differs from the vocabulary size or when
  /// an entry is not finite.
  EmbeddingSpace(Vocabulary vocab, Matrix matrix);

  const Vocabulary& vocab() const { return vocab_; }
  const Matrix& matrix() const { return matrix_; }
  Index size() const { return matrix_.rows(); }
  Index dim() const { return matrix_.cols(); }

  /// The `n` most frequent words (clamped to size()).
  EmbeddingSpace top(Index n) const;

 private:
  Vocabulary vocab_;
  Matrix matrix_;
};

struct LoadStats {
  std::size_t lines_read = 0;
  std::size_t skipped_malformed = 0;
  std::size_t skipped_duplicate = 0;
  bool header_mismatch = false;
};

inline constexpr Index kUnboundedVocab = std::numeric_limits<Index>::max();

/// Reads a fastText text `.vec` file: a "n d" header line followed by
/// "word c1 ... cd" lines.
///
/// Malformed lines (wrong component count, non-numeric values) are skipped
/// with a warning; more than 1% skipped is an error. Duplicate words keep
/// their first occurrence. When the header disagrees with the observed rows
/// the observed shape wins.
EmbeddingSpace load_embeddings(const std::filesystem::path& path,
                               Index max_vocab = kUnboundedVocab,
                               LoadStats* stats = nullptr);

/// Writes the fastText text format, full round-trip precision.
void save_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path);

enum class NormalizeStep { kUnit, kCenter };

std::string to_string(NormalizeStep step);
/// Parses "unit" / "center". Throws ConfigError otherwise.
NormalizeStep parse_normalize_step(std::string_view name);
/// Parses a comma-separated list, e.g. "unit,center,unit". Empty -> none.
std::vector<NormalizeStep> parse_normalize_steps(std::string_view spec);

inline const std::vector<NormalizeStep> kDefaultNormalization = {
    NormalizeStep::kUnit, NormalizeStep::kCenter, NormalizeStep::kUnit};

/// Applies the steps in order. `unit` leaves zero rows untouched and counts
/// them in `zero_rows` when given.
EmbeddingSpace normalize(const EmbeddingSpace& space, const std::vector<NormalizeStep>& steps,
                         std::size_t* zero_rows = nullptr);

/// Deduplicated list of translation pairs, in insertion order. A source word
/// may have several targets.
class Lexicon {
 public:
  using Pair = std::pair<std::string, std::string>;

  /// Returns false if the pair is already present. Throws Error on an empty word.
  bool add(std::string source, std::string target);

  const std::vector<Pair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }

  bool operator==(const Lexicon& other) const { return pairs_ == other.pairs_; }

 private:
  std::vector<Pair> pairs_;
  std::set<Pair> seen_;
};

/// Two whitespace-separated columns per line: "source target". Lines with a
/// different field count are skipped and counted in `skipped`.
Lexicon load_lexicon(const std::filesystem::path& path, std::size_t* skipped = nullptr);
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

/// Converts index pairs to words of the given vocabularies.
Lexicon to_lexicon(const IndexPairs& pairs, const Vocabulary& src, const Vocabulary& tgt);

}  // namespace mmdalign
