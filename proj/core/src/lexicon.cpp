#include "mmdalign/lexicon.hpp"

#include "mmdalign/initializer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>

namespace mmdalign {

namespace {

constexpr Index kBlockRows = 512;

double mean_top_k(const double* values, Index m, Index k, std::vector<double>& scratch) {
  scratch.assign(values, values + m);
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(), std::greater<>());
  double sum = 0.0;
  for (Index t = 0; t < k; ++t) sum += scratch[static_cast<std::size_t>(t)];
  return sum / static_cast<double>(k);
}

}  // namespace

std::string to_string(RetrievalMethod method) {
  return method == RetrievalMethod::kCsls ? "csls" : "nn";
}

RetrievalMethod parse_retrieval_method(std::string_view name) {
  if (name == "nn") return RetrievalMethod::kNearestNeighbor;
  if (name == "csls") return RetrievalMethod::kCsls;
  throw ConfigError("unknown retrieval method '" + std::string(name) + "' (expected nn or csls)");
}

void RetrievalConfig::validate() const {
  if (csls_k < 1) throw ConfigError("csls_k must be >= 1");
  if (refine_iters < 0) throw ConfigError("refine_iters must be >= 0");
  if (dict_vocab < 1) throw ConfigError("dict_vocab must be >= 1");
}

Matrix csls_scores(const Matrix& sim, Index k) {
  if (k < 1 || k > std::min(sim.rows(), sim.cols())) throw Error("csls_scores: k must be in [1, min(n, m)]");
  // Row-major copy so each row is contiguous for the top-k scan.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = sim;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cols = sim.transpose();
  std::vector<double> scratch;
  Vector r_row(sim.rows());
  Vector r_col(sim.cols());
  for (Index i = 0; i < sim.rows(); ++i) r_row(i) = mean_top_k(rows.row(i).data(), sim.cols(), k, scratch);
  for (Index j = 0; j < sim.cols(); ++j) r_col(j) = mean_top_k(cols.row(j).data(), sim.rows(), k, scratch);
  Matrix out = 2.0 * sim;
  out.colwise() -= r_row;
  out.rowwise() -= r_col.transpose();
  return out;
}

Vector knn_mean_similarity(const Matrix& queries, const Matrix& keys, Index k) {
  if (queries.cols() != keys.cols()) throw Error("knn_mean_similarity: dimension mismatch");
  k = std::min(k, keys.rows());
  if (k < 1) throw Error("knn_mean_similarity: no keys");
  Vector out(queries.rows());
  std::vector<double> scratch;
  for (Index start = 0; start < queries.rows(); start += kBlockRows) {
    const Index len = std::min(kBlockRows, queries.rows() - start);
    // keys x block, column-major: each query's similarities are contiguous.
    const Matrix sim = keys * queries.middleRows(start, len).transpose();
    for (Index q = 0; q < len; ++q) out(start + q) = mean_top_k(sim.col(q).data(), keys.rows(), k, scratch);
  }
  return out;
}

std::vector<std::vector<Index>> top_matches(const Matrix& queries, const Matrix& keys, RetrievalMethod method,
                                            Index csls_k, Index n, const Matrix* population) {
  if (queries.cols() != keys.cols()) throw Error("top_matches: dimension mismatch");
  if (keys.rows() == 0) throw Error("top_matches: no keys");
  n = std::min(n, keys.rows());

  // CSLS(i, j) = 2 sim(i, j) - r_query(i) - r_key(j); the query term is
  // constant per row and does not change the ranking.
  Vector penalty = Vector::Zero(keys.rows());
  if (method == RetrievalMethod::kCsls) penalty = knn_mean_similarity(keys, population ? *population : queries, csls_k);

  std::vector<std::vector<Index>> out(static_cast<std::size_t>(queries.rows()));
  std::vector<Index> order(static_cast<std::size_t>(keys.rows()));
  for (Index start = 0; start < queries.rows(); start += kBlockRows) {
    const Index len = std::min(kBlockRows, queries.rows() - start);
    Matrix score = keys * queries.middleRows(start, len).transpose();
    if (method == RetrievalMethod::kCsls) {
      score *= 2.0;
      score.colwise() -= penalty;
    }
    for (Index q = 0; q < len; ++q) {
      const double* s = score.col(q).data();
      auto better = [s](Index a, Index b) { return s[a] > s[b] || (s[a] == s[b] && a < b); };
      std::iota(order.begin(), order.end(), Index{0});
      std::partial_sort(order.begin(), order.begin() + n, order.end(), better);
      out[static_cast<std::size_t>(start + q)].assign(order.begin(), order.begin() + n);
    }
  }
  return out;
}

std::vector<Index> best_matches(const Matrix& queries, const Matrix& keys, RetrievalMethod method, Index csls_k,
                                const Matrix* population) {
  if (queries.cols() != keys.cols()) throw Error("best_matches: dimension mismatch");
  if (keys.rows() == 0) throw Error("best_matches: no keys");
  Vector penalty = Vector::Zero(keys.rows());
  if (method == RetrievalMethod::kCsls) penalty = knn_mean_similarity(keys, population ? *population : queries, csls_k);

  std::vector<Index> out(static_cast<std::size_t>(queries.rows()));
  for (Index start = 0; start < queries.rows(); start += kBlockRows) {
    const Index len = std::min(kBlockRows, queries.rows() - start);
    Matrix score = keys * queries.middleRows(start, len).transpose();
    if (method == RetrievalMethod::kCsls) {
      score *= 2.0;
      score.colwise() -= penalty;
    }
    for (Index q = 0; q < len; ++q) {
      Index arg = 0;
      score.col(q).maxCoeff(&arg);  // first maximum wins
      out[static_cast<std::size_t>(start + q)] = arg;
    }
  }
  return out;
}

Matrix map_and_normalize(const Matrix& src, const MappingMatrix& w) {
  Matrix mapped = src * w.w;
  normalize_rows_inplace(mapped);
  return mapped;
}

IndexPairs induce_dictionary(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                             const RetrievalConfig& cfg) {
  cfg.validate();
  const Index ns = std::min(cfg.dict_vocab, src.size());
  const Index nt = std::min(cfg.dict_vocab, tgt.size());
  const Matrix mapped = map_and_normalize(src.matrix().topRows(ns), w);
  Matrix target = tgt.matrix().topRows(nt);
  normalize_rows_inplace(target);

  const auto forward = best_matches(mapped, target, cfg.method, cfg.csls_k);
  IndexPairs pairs;
  if (!cfg.mutual_nn) {
    for (Index i = 0; i < ns; ++i) pairs.emplace_back(i, forward[static_cast<std::size_t>(i)]);
    return pairs;
  }
  const auto backward = best_matches(target, mapped, cfg.method, cfg.csls_k);
  for (Index i = 0; i < ns; ++i) {
    const Index j = forward[static_cast<std::size_t>(i)];
    if (backward[static_cast<std::size_t>(j)] == i) pairs.emplace_back(i, j);
  }
  return pairs;
}

RefineResult refine(const MappingMatrix& w0, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                    const RetrievalConfig& cfg) {
  cfg.validate();
  RefineResult result{w0, 0, false, {}};
  for (int it = 0; it < cfg.refine_iters; ++it) {
    IndexPairs dict = induce_dictionary(result.mapping, src, tgt, cfg);
    if (dict.empty()) {
      spdlog::warn("refine: empty induced dictionary at iteration {}; keeping last mapping", it);
      result.empty_dictionary = true;
      break;
    }
    if (it > 0 && dict == result.dictionary) break;
    result.mapping = procrustes(src.matrix(), tgt.matrix(), dict).mapping;
    result.dictionary = std::move(dict);
    ++result.iterations;
    spdlog::debug("refine: iteration {} with {} pairs", it, result.dictionary.size());
  }
  return result;
}

}  // namespace mmdalign
