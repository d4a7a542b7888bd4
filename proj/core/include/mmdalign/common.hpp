#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmdalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Source/target row-index pairs, e.g. a seed or induced dictionary.
using IndexPairs = std::vector<std::pair<Index, Index>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input, configuration, or missing file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The optimization produced a non-finite objective or a mapping that fails
/// the convergence guard.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// A d x d linear map applied to row vectors: mapped = x * w.
///
/// Kept near-orthogonal during training and exactly orthogonal after any
/// Procrustes solve.
struct MappingMatrix {
  Matrix w;

  static MappingMatrix identity(Index d) { return {Matrix::Identity(d, d)}; }

  Index dim() const { return w.rows(); }

  /// ||W^T W - I||_F
  double orthogonality_defect() const {
    return (w.transpose() * w - Matrix::Identity(w.cols(), w.cols())).norm();
  }
};

/// Gathers rows of `m` in the order given by `rows`.
Matrix gather_rows(const Matrix& m, const std::vector<Index>& rows);

/// Divides each row by its Euclidean norm; zero rows are left as they are.
void normalize_rows_inplace(Matrix& m);

}  // namespace mmdalign
