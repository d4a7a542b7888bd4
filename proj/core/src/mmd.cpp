#include "mmdalign/mmd.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mmdalign {

KernelSpec::KernelSpec(std::vector<double> bandwidths) : bandwidths_(std::move(bandwidths)) {
  if (bandwidths_.empty()) throw ConfigError("kernel needs at least one bandwidth");
  for (double s : bandwidths_) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("kernel bandwidths must be positive and finite");
  }
}

KernelSpec KernelSpec::median_heuristic(const Matrix& rows, std::uint64_t seed, Index sample) {
  if (rows.rows() < 2) throw ConfigError("median heuristic needs at least two rows");
  std::vector<Index> idx(static_cast<std::size_t>(rows.rows()));
  std::iota(idx.begin(), idx.end(), Index{0});
  if (rows.rows() > sample) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(sample));
  }
  const Matrix s = gather_rows(rows, idx);
  std::vector<double> dist;
  dist.reserve(idx.size() * (idx.size() - 1) / 2);
  for (Index i = 0; i < s.rows(); ++i) {
    for (Index j = i + 1; j < s.rows(); ++j) dist.push_back((s.row(i) - s.row(j)).norm());
  }
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  double median = *mid;
  if (!(median > 0.0)) {
    spdlog::warn("median pairwise distance is zero; using unit base bandwidth");
    median = 1.0;
  }
  std::vector<double> bw;
  for (int e = -3; e <= 6; ++e) bw.push_back(std::ldexp(median, e));
  return KernelSpec(std::move(bw));
}

Projector Projector::identity(Index d) { return {Matrix::Identity(d, d), Vector::Zero(d)}; }

ProjectorFit fit_projector(const EmbeddingSpace& tgt, Index p) {
  const Index d = tgt.dim();
  if (p < 1 || p > d) throw ConfigError("compressed dimension must be in [1, d]");
  if (tgt.size() < p) throw ConfigError("need at least p vectors to fit the projector");

  ProjectorFit fit;
  const Vector mean = tgt.matrix().colwise().mean().transpose();
  const Matrix centered = tgt.matrix().rowwise() - mean.transpose();
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(tgt.size());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw Error("eigendecomposition failed while fitting projector");

  // Eigenvalues come back ascending.
  const Vector& values = eig.eigenvalues();
  const double total = std::max(values.sum(), 0.0);
  Matrix basis(p, d);
  double kept = 0.0;
  for (Index r = 0; r < p; ++r) {
    const Index c = d - 1 - r;
    Vector v = eig.eigenvectors().col(c);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;  // fix the sign so the basis is reproducible
    basis.row(r) = v.transpose();
    kept += std::max(values(c), 0.0);
  }
  const double top = std::max(values(d - 1), 0.0);
  fit.rank_deficient = values(d - p) <= 1e-12 * std::max(top, 1e-300);
  if (fit.rank_deficient) {
    spdlog::warn("projector: data has fewer than {} principal directions; basis padded", p);
  }
  fit.explained_variance = total > 0.0 ? kept / total : 1.0;
  fit.projector = Projector{std::move(basis), mean};
  return fit;
}

Matrix compress(const Matrix& rows, const Projector& proj) {
  if (rows.cols() != proj.input_dim() || proj.offset.size() != proj.input_dim()) {
    throw Error("compress: input has " + std::to_string(rows.cols()) + " columns, projector expects " +
                std::to_string(proj.input_dim()));
  }
  return (rows.rowwise() - proj.offset.transpose()) * proj.basis.transpose();
}

namespace {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const Vector na = a.rowwise().squaredNorm();
  const Vector nb = b.rowwise().squaredNorm();
  Matrix d = -2.0 * (a * b.transpose());
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

// Kernel values and, optionally, the derivative weights
//   g(i, j) = sum_s exp(-D_ij / (2 s^2)) / s^2
// so that d k(a_i, b_j) / d a_i = -g(i, j) (a_i - b_j).
void kernel_and_weights(const Matrix& dist2, const KernelSpec& spec, Matrix& k, Matrix* g) {
  k.setZero(dist2.rows(), dist2.cols());
  if (g) g->setZero(dist2.rows(), dist2.cols());
  for (double s : spec.bandwidths()) {
    const double inv = 1.0 / (2.0 * s * s);
    const Matrix e = (-inv * dist2.array()).exp().matrix();
    k += e;
    if (g) *g += e / (s * s);
  }
}

void check_columns(const Matrix& a, const Matrix& b, const char* what) {
  if (a.cols() != b.cols()) {
    throw Error(std::string(what) + ": column mismatch (" + std::to_string(a.cols()) + " vs " +
                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

Matrix kernel_matrix(const Matrix& a, const Matrix& b, const KernelSpec& spec) {
  check_columns(a, b, "kernel_matrix");
  Matrix k;
  kernel_and_weights(squared_distances(a, b), spec, k, nullptr);
  return k;
}

double mmd2_batch(const Matrix& wx, const Matrix& y, const KernelSpec& spec) {
  check_columns(wx, y, "mmd2_batch");
  if (wx.rows() != y.rows() || wx.rows() == 0) throw Error("mmd2_batch: batches must have equal, nonzero size");
  const double b2 = static_cast<double>(wx.rows()) * static_cast<double>(wx.rows());
  return (kernel_matrix(wx, wx, spec).sum() - 2.0 * kernel_matrix(wx, y, spec).sum() +
          kernel_matrix(y, y, spec).sum()) /
         b2;
}

Mmd2WithGradient mmd2_value_and_gradient(const MappingMatrix& w, const Matrix& x_batch, const Matrix& y_batch,
                                         const Projector& proj, const KernelSpec& spec) {
  if (x_batch.rows() != y_batch.rows() || x_batch.rows() == 0) {
    throw Error("mmd2_gradient: batches must have equal, nonzero size");
  }
  if (x_batch.cols() != w.dim() || y_batch.cols() != w.dim()) throw Error("mmd2_gradient: dimension mismatch");

  const Matrix a = compress(x_batch * w.w, proj);
  const Matrix b = compress(y_batch, proj);
  const double b2 = static_cast<double>(a.rows()) * static_cast<double>(a.rows());

  Matrix kaa, gaa, kab, gab, kbb;
  kernel_and_weights(squared_distances(a, a), spec, kaa, &gaa);
  kernel_and_weights(squared_distances(a, b), spec, kab, &gab);
  kernel_and_weights(squared_distances(b, b), spec, kbb, nullptr);

  Mmd2WithGradient out;
  out.value = (kaa.sum() - 2.0 * kab.sum() + kbb.sum()) / b2;

  // dL/da_i = (2/B^2) [ -sum_j gaa_ij (a_i - a_j) + sum_j gab_ij (a_i - b_j) ]
  const Vector raa = gaa.rowwise().sum();
  const Vector rab = gab.rowwise().sum();
  Matrix grad_a = (gaa * a - raa.asDiagonal() * a) + (rab.asDiagonal() * a - gab * b);
  grad_a *= 2.0 / b2;

  // a = (x W - offset) P^T  =>  dL/dW = x^T (dL/da) P
  out.gradient = x_batch.transpose() * (grad_a * proj.basis);
  return out;
}

Matrix mmd2_gradient(const MappingMatrix& w, const Matrix& x_batch, const Matrix& y_batch, const Projector& proj,
                     const KernelSpec& spec) {
  return mmd2_value_and_gradient(w, x_batch, y_batch, proj, spec).gradient;
}

}  // namespace mmdalign
