#pragma once

#include "mmdalign/common.hpp"
#include "mmdalign/embeddings.hpp"
#include "mmdalign/evaluator.hpp"
#include "mmdalign/initializer.hpp"
#include "mmdalign/lexicon.hpp"
#include "mmdalign/mmd.hpp"
#include "mmdalign/trainer.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mmdalign {

/// Everything the in-memory alignment pipeline needs besides the two spaces.
struct PipelineConfig {
  InitConfig init;
  TrainConfig train;
  RetrievalConfig refine;  // dictionary induction during refinement
  Index compress_dim = 50;  // <= 0 or == d selects the identity projector
  Index criterion_words = 10000;
  /// Minimum chance-normalized criterion (see normalized_criterion) for a run
  /// to count as converged; checked after MMD training and at the end.
  double convergence_floor = 0.05;
  int chance_samples = 3;
  bool enable_init = true;
  bool enable_mmd = true;
  bool enable_refine = true;

  void validate() const;
};

/// PCA projector fit on the target, or the identity when compress_dim <= 0
/// or equals the embedding dimension.
Projector make_projector(const EmbeddingSpace& tgt, Index compress_dim);

enum class AlignStatus { kConverged, kNonConvergence };

std::string to_string(AlignStatus status);

struct StageRecord {
  std::string name;  // "init", "mmd", "refine"
  bool ran = false;
};

struct AlignOutcome {
  AlignStatus status = AlignStatus::kConverged;
  std::string diagnostic;
  MappingMatrix mapping;
  Projector projector;
  std::optional<KernelSpec> kernel;
  TrainHistory history;
  IndexPairs seed_dictionary;
  IndexPairs refined_dictionary;
  std::vector<StageRecord> stages;
  double final_criterion = 0.0;
  double chance_criterion = 0.0;
  double final_normalized = 0.0;
  std::optional<double> mmd_normalized;  // best training epoch, when MMD ran
};

/// Runs the enabled stages in order init -> MMD training -> refinement on
/// already-normalized spaces. Without initialization W0 is the identity.
///
/// The run is reported as non-converged (not thrown) when the objective goes
/// non-finite, or when the chance-normalized criterion is below the
/// convergence floor at the end of MMD training or at the end of the run.
AlignOutcome run_alignment(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const PipelineConfig& cfg,
                           const TrainHooks& hooks = {});

struct AblationRow {
  std::string name;  // "full", "w/o MMD-matching", "w/o refinement", "w/o initialization"
  bool enable_init = true;
  bool enable_mmd = true;
  bool enable_refine = true;
  AlignStatus status = AlignStatus::kConverged;
  double criterion = 0.0;
  std::optional<BliReport> bli;  // absent for non-converged rows
};

/// The four switch combinations: full, no MMD, no refinement, no
/// initialization. Each row reuses `cfg` (and its seed) with one stage off.
std::vector<AblationRow> run_ablation(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Lexicon& gold,
                                      const PipelineConfig& cfg, const RetrievalConfig& eval);

}  // namespace mmdalign
