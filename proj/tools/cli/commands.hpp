#pragma once

#include "mmdalign/embeddings.hpp"
#include "mmdalign/lexicon.hpp"
#include "mmdalign/pipeline.hpp"
#include "mmdalign/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mmdalign::cli {

/// Process exit statuses; disjoint by construction.
enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kConfigError = 2,
  kNonConvergence = 3,
  kCheckFailed = 4,
};

struct RunConfig {
  std::filesystem::path src_emb;
  std::filesystem::path tgt_emb;
  std::filesystem::path gold;
  std::filesystem::path sim_pairs;
  std::filesystem::path out_dir = "mmdalign_out";
  std::filesystem::path mapping;  // evaluate/induce input; defaults to <out>/mapping.txt

  Index max_vocab = kUnboundedVocab;
  std::vector<NormalizeStep> normalization = kDefaultNormalization;
  PipelineConfig pipeline;
  RetrievalMethod eval_retrieval = RetrievalMethod::kNearestNeighbor;
  Index bucket_cutoff = 20000;
  std::uint64_t seed = 0;
  bool check_order = false;  // ablate: fail when full >= no-MMD >= no-refine does not hold

  /// Resolved mapping path for evaluate/induce.
  std::filesystem::path mapping_path() const;
};

/// init -> MMD -> refine. Writes mapping.txt, final.ckpt, per-epoch
/// checkpoints, history.jsonl, seed_dictionary.txt and manifest.json under
/// out_dir.
int cmd_align(const RunConfig& cfg);

/// BLI (with common/rare buckets) and word-similarity reports for a trained
/// mapping. Table to stdout, records to <out>/eval.jsonl.
int cmd_evaluate(const RunConfig& cfg);

/// Writes the dictionary induced by a trained mapping to
/// <out>/induced_lexicon.txt.
int cmd_induce(const RunConfig& cfg);

/// Runs the four ablation rows and writes ablation.tsv / ablation.jsonl.
int cmd_ablate(const RunConfig& cfg);

/// Writes a synthetic rotated pair (src.vec, tgt.vec), its gold lexicon
/// (gold.txt) and word-similarity pairs (sim_pairs.txt) to out_dir.
int cmd_synth(const SyntheticOptions& opts, const std::filesystem::path& out_dir);

/// Entry point shared by the binary and the tests.
int run(int argc, char** argv);

}  // namespace mmdalign::cli
