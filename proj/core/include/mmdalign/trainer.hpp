#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"
#include "mmdalign/mmd.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mmdalign {

struct TrainConfig {
  Index batch_size = 1280;
  double beta = 0.01;  // retraction strength
  double lr0 = 0.0003;  // halved after every epoch
  int max_epochs = 20;
  Index sample_vocab = 20000;  // batches drawn from this many most frequent words
  bool sample_full_vocab = false;
  std::uint64_t seed = 0;
  int patience = 3;  // epochs without criterion improvement before stopping

  /// Throws ConfigError on B < 2, beta outside (0, 0.5), lr0 <= 0,
  /// max_epochs < 1 or patience < 1.
  void validate() const;

  /// Learning rate used during `epoch` (0-based): lr0 * 2^-epoch.
  double learning_rate(int epoch) const;
};

/// W := (1 + beta) W - beta (W W^T) W
///
/// Orthogonal matrices are fixed points. For beta in (0, 0.5) each singular
/// value near 1 moves toward 1 by a factor of about (1 - 2 beta); beta = 0.5
/// is the quadratically convergent Newton-Schulz polar iteration.
Matrix orthogonality_retraction(const Matrix& w, double beta);

/// Repeats the retraction until ||W^T W - I||_F <= tol or `max_iters`
/// applications have been made.
Matrix retract_until(const Matrix& w, double beta, double tol, int max_iters = 100000);

/// Orthogonality defect allowed while training; a step that ends above it is
/// retracted further until back inside.
inline constexpr double kTrainingDefectBound = 0.1;
/// Defect of the mapping snapshots that are scored and returned.
inline constexpr double kSnapshotDefectBound = 1e-3;

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  Matrix m;
  Matrix v;
  long step = 0;
};

struct AdamStep {
  Matrix w;
  AdamState state;
};

/// One bias-corrected Adam update. A default-constructed state is sized on
/// first use.
AdamStep adam_step(const Matrix& w, const Matrix& grad, AdamState state, double lr, const AdamParams& params = {});

struct StepRecord {
  int epoch = 0;
  long step = 0;  // global step index
  double mmd2 = 0.0;
  double defect = 0.0;  // ||W^T W - I||_F after the retraction
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double criterion = 0.0;
  double defect = 0.0;
  double mean_mmd2 = 0.0;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_criterion = 0.0;
  std::string stop_reason;
};

struct TrainResult {
  MappingMatrix mapping;  // checkpoint with the best criterion
  TrainHistory history;
};

/// Unsupervised model-selection score; higher is better.
using Criterion = std::function<double(const MappingMatrix&)>;

struct TrainHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<void(const EpochRecord&, const MappingMatrix&)> on_epoch;
};

/// Number of minibatch steps making up one epoch.
Index steps_per_epoch(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const TrainConfig& cfg);

/// Minibatch MMD training of the mapping.
///
/// Each step draws B source and B target rows independently and uniformly
/// (with replacement) from the sampling range, takes an Adam step on the MMD^2
/// gradient and applies the orthogonality retraction. After each epoch the
/// learning rate halves and a snapshot of W, retracted down to
/// kSnapshotDefectBound, is scored with `criterion`; the best-scoring snapshot
/// is returned. Throws NonConvergence on a non-finite objective.
TrainResult train(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const MappingMatrix& w0,
                  const Projector& proj, const KernelSpec& spec, const TrainConfig& cfg, const Criterion& criterion,
                  const TrainHooks& hooks = {});

}  // namespace mmdalign
