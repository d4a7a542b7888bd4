#include "mmdalign/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mmdalign {

Matrix random_orthogonal(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(d, d);
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < d; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

IndexPairs SyntheticPair::gold_pairs() const {
  IndexPairs pairs;
  for (std::size_t i = 0; i < target_of.size(); ++i) pairs.emplace_back(static_cast<Index>(i), target_of[i]);
  return pairs;
}

SyntheticPair make_synthetic_pair(const SyntheticOptions& opts) {
  if (opts.n < 2 || opts.d < 1) throw ConfigError("synthetic instance needs n >= 2 and d >= 1");
  if (!(opts.spectrum_ratio >= 1.0)) throw ConfigError("spectrum_ratio must be >= 1");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix x(opts.n, opts.d);
  for (Index j = 0; j < opts.d; ++j) {
    const double frac = opts.d > 1 ? static_cast<double>(j) / static_cast<double>(opts.d - 1) : 0.0;
    const double scale = std::pow(opts.spectrum_ratio, -frac);
    for (Index i = 0; i < opts.n; ++i) x(i, j) = scale * normal(rng);
  }

  SyntheticPair out;
  out.rotation = random_orthogonal(opts.d, rng);
  Matrix y = x * out.rotation;
  for (Index i = 0; i < opts.n; ++i) {
    const double sigma = i >= opts.rare_from ? opts.noise * opts.rare_noise_scale : opts.noise;
    for (Index j = 0; j < opts.d; ++j) y(i, j) += sigma * normal(rng);
  }

  out.target_of.resize(static_cast<std::size_t>(opts.n));
  std::iota(out.target_of.begin(), out.target_of.end(), Index{0});
  if (opts.shuffle) std::shuffle(out.target_of.begin(), out.target_of.end(), rng);

  Matrix y_placed(opts.n, opts.d);
  for (Index i = 0; i < opts.n; ++i) y_placed.row(out.target_of[static_cast<std::size_t>(i)]) = y.row(i);

  std::vector<std::string> src_words, tgt_words;
  for (Index i = 0; i < opts.n; ++i) {
    src_words.push_back("s" + std::to_string(i));
    tgt_words.push_back("t" + std::to_string(i));
  }
  out.src = EmbeddingSpace(Vocabulary(std::move(src_words)), std::move(x));
  out.tgt = EmbeddingSpace(Vocabulary(std::move(tgt_words)), std::move(y_placed));
  for (Index i = 0; i < opts.n; ++i) {
    out.gold.add(out.src.vocab().word(i), out.tgt.vocab().word(out.target_of[static_cast<std::size_t>(i)]));
  }
  return out;
}

}  // namespace mmdalign
