#include "mmdalign/evaluator.hpp"

#include "mmdalign/synthetic.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mmdalign {

namespace {

struct GoldQuery {
  Index source = 0;
  std::set<Index> targets;
};

struct ScoredQueries {
  std::vector<GoldQuery> queries;
  std::vector<std::vector<Index>> retrieved;  // top-5 per query
  Index skipped = 0;
};

ScoredQueries score_gold(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                         const Lexicon& gold, const RetrievalConfig& cfg) {
  cfg.validate();
  if (gold.empty()) throw Error("gold lexicon is empty");

  // Distinct source words in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, std::set<Index>> translations;
  for (const auto& [s, t] : gold.pairs()) {
    auto [it, inserted] = translations.try_emplace(s);
    if (inserted) order.push_back(s);
    if (auto j = tgt.vocab().find(t)) it->second.insert(*j);
  }

  ScoredQueries out;
  std::vector<Index> rows;
  for (const auto& s : order) {
    const auto i = src.vocab().find(s);
    const auto& targets = translations[s];
    if (!i || targets.empty()) {
      ++out.skipped;
      continue;
    }
    out.queries.push_back({*i, targets});
    rows.push_back(*i);
  }
  if (out.queries.empty()) throw Error("every gold source word is out of vocabulary");

  const Matrix queries = map_and_normalize(gather_rows(src.matrix(), rows), w);
  Matrix keys = tgt.matrix();
  normalize_rows_inplace(keys);
  Matrix population;
  if (cfg.method == RetrievalMethod::kCsls) {
    population = map_and_normalize(src.matrix().topRows(std::min(cfg.dict_vocab, src.size())), w);
  }
  out.retrieved = top_matches(queries, keys, cfg.method, cfg.csls_k, 5,
                              cfg.method == RetrievalMethod::kCsls ? &population : nullptr);
  return out;
}

bool hit_at(const GoldQuery& q, const std::vector<Index>& retrieved, std::size_t k) {
  for (std::size_t r = 0; r < std::min(k, retrieved.size()); ++r) {
    if (q.targets.count(retrieved[r])) return true;
  }
  return false;
}

BucketReport buckets_from(const ScoredQueries& scored, Index cutoff) {
  BucketReport b;
  b.cutoff = cutoff;
  Index common_hits = 0;
  Index rare_hits = 0;
  for (std::size_t q = 0; q < scored.queries.size(); ++q) {
    const bool hit = hit_at(scored.queries[q], scored.retrieved[q], 1);
    if (scored.queries[q].source < cutoff) {
      ++b.n_common;
      common_hits += hit;
    } else {
      ++b.n_rare;
      rare_hits += hit;
    }
  }
  if (b.n_common > 0) b.common_p_at_1 = static_cast<double>(common_hits) / static_cast<double>(b.n_common);
  if (b.n_rare > 0) b.rare_p_at_1 = static_cast<double>(rare_hits) / static_cast<double>(b.n_rare);
  return b;
}

}  // namespace

BliReport bli_accuracy(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                       const Lexicon& gold, const RetrievalConfig& cfg, Index bucket_cutoff) {
  const auto scored = score_gold(w, src, tgt, gold, cfg);
  BliReport r;
  Index hits1 = 0;
  Index hits5 = 0;
  for (std::size_t q = 0; q < scored.queries.size(); ++q) {
    hits1 += hit_at(scored.queries[q], scored.retrieved[q], 1);
    hits5 += hit_at(scored.queries[q], scored.retrieved[q], 5);
  }
  r.n_evaluated = static_cast<Index>(scored.queries.size());
  r.n_skipped_oov = scored.skipped;
  r.p_at_1 = static_cast<double>(hits1) / static_cast<double>(r.n_evaluated);
  r.p_at_5 = static_cast<double>(hits5) / static_cast<double>(r.n_evaluated);
  r.buckets = buckets_from(scored, bucket_cutoff);
  return r;
}

BucketReport frequency_bucket_report(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                     const Lexicon& gold, const RetrievalConfig& cfg, Index cutoff) {
  return buckets_from(score_gold(w, src, tgt, gold, cfg), cutoff);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("pearson: series differ in length");
  if (a.size() < 2) throw Error("pearson: need at least two values");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw Error("pearson: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<SimilarityPair> load_similarity_pairs(const std::filesystem::path& path, std::size_t* skipped) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open similarity pairs " + path.string());
  std::vector<SimilarityPair> out;
  std::size_t bad = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string s, t, score, extra;
    if (!(fields >> s)) continue;
    double value = 0.0;
    const bool ok = (fields >> t) && (fields >> score) && !(fields >> extra) &&
                    std::from_chars(score.data(), score.data() + score.size(), value).ec == std::errc() &&
                    std::isfinite(value);
    if (!ok) {
      ++bad;
      spdlog::warn("{}:{}: expected \"src tgt score\"; skipped", path.string(), lineno);
      continue;
    }
    out.push_back({std::move(s), std::move(t), value});
  }
  if (skipped) *skipped = bad;
  return out;
}

SimilarityReport word_similarity(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                 const std::vector<SimilarityPair>& pairs) {
  SimilarityReport r;
  std::vector<double> predicted, human;
  for (const auto& p : pairs) {
    const auto i = src.vocab().find(p.source);
    const auto j = tgt.vocab().find(p.target);
    if (!i || !j) {
      ++r.n_skipped_oov;
      continue;
    }
    const Eigen::RowVectorXd x = src.matrix().row(*i) * w.w;
    const auto y = tgt.matrix().row(*j);
    const double denom = x.norm() * y.norm();
    predicted.push_back(denom > 0.0 ? x.dot(y) / denom : 0.0);
    human.push_back(p.score);
  }
  r.n_used = static_cast<Index>(predicted.size());
  if (r.n_used < 2) throw Error("word similarity: fewer than two in-vocabulary pairs");
  r.pearson_r = pearson(predicted, human);
  return r;
}

double unsupervised_criterion(const MappingMatrix& w, const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                              Index k_words, Index csls_k) {
  const Index ns = std::min(k_words, src.size());
  const Index nt = std::min(k_words, tgt.size());
  const Matrix mapped = map_and_normalize(src.matrix().topRows(ns), w);
  Matrix target = tgt.matrix().topRows(nt);
  normalize_rows_inplace(target);
  const auto best = best_matches(mapped, target, RetrievalMethod::kCsls, csls_k);
  double sum = 0.0;
  for (Index i = 0; i < ns; ++i) sum += mapped.row(i).dot(target.row(best[static_cast<std::size_t>(i)]));
  return sum / static_cast<double>(ns);
}

double chance_criterion(const EmbeddingSpace& src, const EmbeddingSpace& tgt, std::uint64_t seed, int samples,
                        Index k_words, Index csls_k) {
  if (samples < 1) throw ConfigError("chance_criterion needs at least one sample");
  std::mt19937_64 rng(seed);
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    sum += unsupervised_criterion({random_orthogonal(src.dim(), rng)}, src, tgt, k_words, csls_k);
  }
  return sum / samples;
}

double normalized_criterion(double criterion, double chance) {
  const double span = 1.0 - chance;
  return span > 1e-12 ? (criterion - chance) / span : 0.0;
}

}  // namespace mmdalign
