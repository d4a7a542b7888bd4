#include "mmdalign/initializer.hpp"

#include "mmdalign/lexicon.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <functional>

namespace mmdalign {

void InitConfig::validate() const {
  if (vocab_cap < 2) throw ConfigError("init vocab_cap must be >= 2");
  if (csls_k < 1) throw ConfigError("init csls_k must be >= 1");
}

Matrix similarity_signature(const EmbeddingSpace& space, Index cap) {
  if (cap < 1 || cap > space.size()) {
    throw ConfigError("signature cap " + std::to_string(cap) + " exceeds vocabulary size " +
                      std::to_string(space.size()));
  }
  const auto x = space.matrix().topRows(cap);
  Matrix gram = x * x.transpose();
  // Sort rows in place: transpose so each word's similarities are contiguous.
  gram.transposeInPlace();
  for (Index i = 0; i < cap; ++i) {
    double* col = gram.col(i).data();
    std::sort(col, col + cap, std::greater<>());
    const double n = gram.col(i).norm();
    if (n > 0.0) gram.col(i) /= n;
  }
  gram.transposeInPlace();
  return gram;
}

IndexPairs match_signatures(const Matrix& sig_x, const Matrix& sig_y, bool use_csls, Index csls_k) {
  const Index width = std::max(sig_x.cols(), sig_y.cols());
  auto padded = [width](const Matrix& s) {
    Matrix p = Matrix::Zero(s.rows(), width);
    p.leftCols(s.cols()) = s;
    normalize_rows_inplace(p);
    return p;
  };
  const Matrix px = padded(sig_x);
  const Matrix py = padded(sig_y);
  const auto method = use_csls ? RetrievalMethod::kCsls : RetrievalMethod::kNearestNeighbor;
  const auto best = best_matches(px, py, method, csls_k);
  IndexPairs pairs;
  pairs.reserve(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) pairs.emplace_back(static_cast<Index>(i), best[i]);
  return pairs;
}

ProcrustesResult procrustes(const Matrix& x_pairs, const Matrix& y_pairs) {
  if (x_pairs.rows() < 1 || x_pairs.rows() != y_pairs.rows() || x_pairs.cols() != y_pairs.cols()) {
    throw Error("procrustes: inputs must be nonempty and of equal shape");
  }
  const Matrix cross = x_pairs.transpose() * y_pairs;
  Eigen::BDCSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  ProcrustesResult out;
  out.mapping.w = svd.matrixU() * svd.matrixV().transpose();
  const Vector& s = svd.singularValues();
  out.degenerate = s.size() == 0 || s(s.size() - 1) < 1e-12;
  if (out.degenerate) spdlog::debug("procrustes: rank-deficient cross-covariance (sigma_min = {})", s(s.size() - 1));
  return out;
}

ProcrustesResult procrustes(const Matrix& src, const Matrix& tgt, const IndexPairs& pairs) {
  std::vector<Index> si, ti;
  si.reserve(pairs.size());
  ti.reserve(pairs.size());
  for (const auto& [s, t] : pairs) {
    si.push_back(s);
    ti.push_back(t);
  }
  return procrustes(gather_rows(src, si), gather_rows(tgt, ti));
}

InitResult build_initial_mapping(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const InitConfig& cfg) {
  cfg.validate();
  if (src.dim() != tgt.dim()) throw ConfigError("source and target embeddings differ in dimension");
  const Index cap_x = std::min(cfg.vocab_cap, src.size());
  const Index cap_y = std::min(cfg.vocab_cap, tgt.size());
  const Matrix sig_x = similarity_signature(src, cap_x);
  const Matrix sig_y = similarity_signature(tgt, cap_y);
  InitResult out;
  out.seed = match_signatures(sig_x, sig_y, cfg.use_csls, cfg.csls_k);
  out.mapping = procrustes(src.matrix(), tgt.matrix(), out.seed).mapping;
  spdlog::info("initializer: {} seed pairs from {}x{} signatures", out.seed.size(), cap_x, cap_y);
  return out;
}

}  // namespace mmdalign
