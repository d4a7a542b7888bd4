#include "mmdalign/embeddings.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mmdalign {

Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

void normalize_rows_inplace(Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double n = m.row(i).norm();
    if (n > 0.0) m.row(i) /= n;
  }
}

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> words) {
  words_.reserve(words.size());
  for (auto& w : words) {
    if (!add(std::move(w))) throw Error("duplicate word in vocabulary");
  }
}

bool Vocabulary::add(std::string word) {
  auto [it, inserted] = index_.try_emplace(word, static_cast<Index>(words_.size()));
  if (!inserted) return false;
  words_.push_back(std::move(word));
  return true;
}

std::optional<Index> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary Vocabulary::prefix(Index n) const {
  n = std::min(n, size());
  return Vocabulary(std::vector<std::string>(words_.begin(), words_.begin() + n));
}

// --- EmbeddingSpace ---------------------------------------------------------

EmbeddingSpace::EmbeddingSpace(Vocabulary vocab, Matrix matrix)
    : vocab_(std::move(vocab)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != vocab_.size()) {
    throw Error("embedding matrix has " + std::to_string(matrix_.rows()) + " rows but vocabulary has " +
                std::to_string(vocab_.size()) + " words");
  }
  if (!matrix_.allFinite()) throw Error("embedding matrix contains non-finite entries");
}

EmbeddingSpace EmbeddingSpace::top(Index n) const {
  n = std::min(n, size());
  return EmbeddingSpace(vocab_.prefix(n), matrix_.topRows(n));
}

// --- .vec I/O ---------------------------------------------------------------

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view token, double& value) {
  const char* end = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(token.data(), end, value);
  return ec == std::errc() && ptr == end && std::isfinite(value);
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

EmbeddingSpace load_embeddings(const std::filesystem::path& path, Index max_vocab, LoadStats* stats) {
  if (max_vocab < 1) throw ConfigError("max_vocab must be positive");
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open embedding file " + path.string());

  LoadStats local;
  std::string line;
  if (!std::getline(in, line)) throw Error("embedding file " + path.string() + " is empty");
  strip_cr(line);
  const auto header = split_spaces(line);
  long long header_n = 0;
  long long header_d = 0;
  if (header.size() != 2 ||
      std::from_chars(header[0].data(), header[0].data() + header[0].size(), header_n).ec != std::errc() ||
      std::from_chars(header[1].data(), header[1].data() + header[1].size(), header_d).ec != std::errc() ||
      header_n < 0 || header_d < 1) {
    throw Error("embedding file " + path.string() + ": first line must be \"n d\"");
  }

  // The dimension is taken from the header unless the first data line
  // disagrees, in which case the observed width wins.
  Index dim = static_cast<Index>(header_d);
  bool dim_checked = false;

  Vocabulary vocab;
  std::vector<double> values;
  std::size_t kept = 0;
  std::vector<double> row;
  while (kept < static_cast<std::size_t>(max_vocab) && std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    ++local.lines_read;
    const auto fields = split_spaces(line);
    if (!dim_checked && fields.size() >= 2) {
      const auto observed = static_cast<Index>(fields.size() - 1);
      if (observed != dim) {
        spdlog::warn("{}: header declares dimension {} but rows have {}; using observed", path.string(), dim,
                     observed);
        local.header_mismatch = true;
        dim = observed;
      }
      dim_checked = true;
    }
    if (static_cast<Index>(fields.size()) != dim + 1) {
      ++local.skipped_malformed;
      spdlog::warn("{}:{}: expected {} fields, got {}; skipped", path.string(), local.lines_read + 1, dim + 1,
                   fields.size());
      continue;
    }
    row.resize(static_cast<std::size_t>(dim));
    bool ok = true;
    for (Index c = 0; c < dim && ok; ++c) ok = parse_double(fields[static_cast<std::size_t>(c) + 1], row[c]);
    if (!ok) {
      ++local.skipped_malformed;
      spdlog::warn("{}:{}: non-numeric component; skipped", path.string(), local.lines_read + 1);
      continue;
    }
    if (!vocab.add(std::string(fields[0]))) {
      ++local.skipped_duplicate;
      continue;
    }
    values.insert(values.end(), row.begin(), row.end());
    ++kept;
  }

  if (kept == 0) throw Error("embedding file " + path.string() + " has no usable rows");
  if (local.skipped_malformed * 100 > local.lines_read) {
    throw Error("embedding file " + path.string() + ": " + std::to_string(local.skipped_malformed) + " of " +
                std::to_string(local.lines_read) + " lines malformed (more than 1%)");
  }
  // Only compare counts when the whole file was consumed.
  if (kept < static_cast<std::size_t>(max_vocab) && static_cast<long long>(kept) != header_n) {
    if (!local.header_mismatch) {
      spdlog::warn("{}: header declares {} vectors but {} were read; using observed", path.string(), header_n,
                   kept);
    }
    local.header_mismatch = true;
  }
  if (local.skipped_duplicate > 0) {
    spdlog::warn("{}: {} duplicate words ignored (first occurrence kept)", path.string(), local.skipped_duplicate);
  }

  Matrix m(static_cast<Index>(kept), dim);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index c = 0; c < dim; ++c) m(i, c) = values[static_cast<std::size_t>(i * dim + c)];
  }
  if (stats) *stats = local;
  return EmbeddingSpace(std::move(vocab), std::move(m));
}

void save_embeddings(const EmbeddingSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << space.size() << ' ' << space.dim() << '\n';
  char buf[32];
  for (Index i = 0; i < space.size(); ++i) {
    out << space.vocab().word(i);
    for (Index c = 0; c < space.dim(); ++c) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), space.matrix()(i, c));
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

// --- normalization ----------------------------------------------------------

std::string to_string(NormalizeStep step) {
  switch (step) {
    case NormalizeStep::kUnit: return "unit";
    case NormalizeStep::kCenter: return "center";
  }
  return "?";
}

NormalizeStep parse_normalize_step(std::string_view name) {
  if (name == "unit") return NormalizeStep::kUnit;
  if (name == "center") return NormalizeStep::kCenter;
  throw ConfigError("unknown normalization step '" + std::string(name) + "'");
}

std::vector<NormalizeStep> parse_normalize_steps(std::string_view spec) {
  std::vector<NormalizeStep> steps;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const std::size_t comma = spec.find(',', start);
    const auto token = spec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!token.empty() && token != "none") steps.push_back(parse_normalize_step(token));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return steps;
}

EmbeddingSpace normalize(const EmbeddingSpace& space, const std::vector<NormalizeStep>& steps,
                         std::size_t* zero_rows) {
  if (space.size() == 0) throw Error("cannot normalize an empty embedding space");
  Matrix m = space.matrix();
  std::size_t zeros = 0;
  for (auto step : steps) {
    if (step == NormalizeStep::kCenter) {
      const Eigen::RowVectorXd mean = m.colwise().mean();
      m.rowwise() -= mean;
    } else {
      zeros = 0;
      for (Index i = 0; i < m.rows(); ++i) {
        const double n = m.row(i).norm();
        if (n > 0.0) {
          m.row(i) /= n;
        } else {
          ++zeros;
        }
      }
      if (zeros > 0) spdlog::warn("normalize: {} zero rows left unnormalized", zeros);
    }
  }
  if (zero_rows) *zero_rows = zeros;
  return EmbeddingSpace(space.vocab(), std::move(m));
}

// --- lexicon ----------------------------------------------------------------

bool Lexicon::add(std::string source, std::string target) {
  if (source.empty() || target.empty()) throw Error("lexicon words must be nonempty");
  Pair p{std::move(source), std::move(target)};
  if (!seen_.insert(p).second) return false;
  pairs_.push_back(std::move(p));
  return true;
}

Lexicon load_lexicon(const std::filesystem::path& path, std::size_t* skipped) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open lexicon " + path.string());
  Lexicon lex;
  std::size_t bad = 0;
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    std::istringstream fields(line);
    std::string src, tgt, extra;
    if (!(fields >> src)) continue;  // blank line
    if (!(fields >> tgt) || (fields >> extra)) {
      ++bad;
      spdlog::warn("{}:{}: expected 2 fields; skipped", path.string(), lineno);
      continue;
    }
    lex.add(std::move(src), std::move(tgt));
  }
  if (skipped) *skipped = bad;
  return lex;
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (const auto& [s, t] : lexicon.pairs()) out << s << ' ' << t << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

Lexicon to_lexicon(const IndexPairs& pairs, const Vocabulary& src, const Vocabulary& tgt) {
  Lexicon lex;
  for (const auto& [i, j] : pairs) lex.add(src.word(i), tgt.word(j));
  return lex;
}

}  // namespace mmdalign
