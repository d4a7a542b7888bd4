#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"

#include <cstdint>
#include <vector>

namespace mmdalign {

/// Mixture of isotropic Gaussian kernels:
///   k(a, b) = sum_s exp(-||a - b||^2 / (2 s^2))
class KernelSpec {
 public:
  /// Throws ConfigError unless `bandwidths` is nonempty and all positive.
  explicit KernelSpec(std::vector<double> bandwidths);

  const std::vector<double>& bandwidths() const { return bandwidths_; }
  std::size_t size() const { return bandwidths_.size(); }

  /// Ten bandwidths {2^-3, ..., 2^6} * median pairwise distance of (at most)
  /// `sample` rows drawn from `rows` with the given seed.
  static KernelSpec median_heuristic(const Matrix& rows, std::uint64_t seed, Index sample = 2048);

 private:
  std::vector<double> bandwidths_;
};

/// Fixed linear compressor shared by both languages:
///   compress(x) = (x - offset) * basis^T
/// `basis` is p x d with orthonormal rows.
struct Projector {
  Matrix basis;
  Vector offset;

  Index input_dim() const { return basis.cols(); }
  Index output_dim() const { return basis.rows(); }

  /// p == d, zero offset.
  static Projector identity(Index d);
};

struct ProjectorFit {
  Projector projector;
  /// Set when the data has fewer than p nonzero principal directions and the
  /// basis was completed with arbitrary orthonormal directions.
  bool rank_deficient = false;
  /// Fraction of total variance captured by the kept directions.
  double explained_variance = 0.0;
};

/// PCA projector fit on `tgt`: offset is the column mean, basis rows are the
/// top-p principal directions. Throws ConfigError when p > d or p > size.
ProjectorFit fit_projector(const EmbeddingSpace& tgt, Index p);

/// (rows - offset) * basis^T. Throws Error on a dimension mismatch.
Matrix compress(const Matrix& rows, const Projector& proj);

/// Entry (i, j) = k(a_i, b_j). Throws Error on a column mismatch.
Matrix kernel_matrix(const Matrix& a, const Matrix& b, const KernelSpec& spec);

/// Biased (V-statistic) minibatch estimate of MMD^2, self-pairs included:
///   (1/B^2) [sum k(wx_i, wx_j) - 2 sum k(wx_i, y_j) + sum k(y_i, y_j)]
/// Both batches must have the same number of rows.
double mmd2_batch(const Matrix& wx, const Matrix& y, const KernelSpec& spec);

struct Mmd2WithGradient {
  double value = 0.0;
  Matrix gradient;  // d x d
};

/// Value and analytic gradient with respect to W of
///   mmd2_batch(compress(x_batch * W), compress(y_batch)).
Mmd2WithGradient mmd2_value_and_gradient(const MappingMatrix& w, const Matrix& x_batch, const Matrix& y_batch,
                                         const Projector& proj, const KernelSpec& spec);

/// Gradient only; see mmd2_value_and_gradient.
Matrix mmd2_gradient(const MappingMatrix& w, const Matrix& x_batch, const Matrix& y_batch, const Projector& proj,
                     const KernelSpec& spec);

}  // namespace mmdalign
