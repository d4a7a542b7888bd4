#include "mmdalign/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

namespace mmdalign {

void PipelineConfig::validate() const {
  init.validate();
  train.validate();
  refine.validate();
  if (criterion_words < 1) throw ConfigError("criterion_words must be >= 1");
  if (chance_samples < 1) throw ConfigError("chance_samples must be >= 1");
}

Projector make_projector(const EmbeddingSpace& tgt, Index compress_dim) {
  if (compress_dim <= 0 || compress_dim == tgt.dim()) return Projector::identity(tgt.dim());
  return fit_projector(tgt, compress_dim).projector;
}

std::string to_string(AlignStatus status) {
  return status == AlignStatus::kConverged ? "converged" : "non-convergence";
}

AlignOutcome run_alignment(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const PipelineConfig& cfg,
                           const TrainHooks& hooks) {
  cfg.validate();
  if (src.dim() != tgt.dim()) throw ConfigError("source and target embeddings differ in dimension");
  const Index d = src.dim();

  AlignOutcome out;
  const auto criterion = [&](const MappingMatrix& w) {
    return unsupervised_criterion(w, src, tgt, cfg.criterion_words, cfg.refine.csls_k);
  };

  out.projector = make_projector(tgt, cfg.compress_dim);
  out.chance_criterion =
      chance_criterion(src, tgt, cfg.train.seed, cfg.chance_samples, cfg.criterion_words, cfg.refine.csls_k);
  const auto fail = [&](std::string why) {
    out.status = AlignStatus::kNonConvergence;
    if (out.diagnostic.empty()) out.diagnostic = std::move(why);
  };

  out.stages.push_back({"init", cfg.enable_init});
  if (cfg.enable_init) {
    auto init = build_initial_mapping(src, tgt, cfg.init);
    out.mapping = std::move(init.mapping);
    out.seed_dictionary = std::move(init.seed);
  } else {
    out.mapping = MappingMatrix::identity(d);
  }

  out.stages.push_back({"mmd", cfg.enable_mmd});
  if (cfg.enable_mmd) {
    const Index sample = std::min(cfg.train.sample_vocab, tgt.size());
    out.kernel = KernelSpec::median_heuristic(compress(tgt.matrix().topRows(sample), out.projector), cfg.train.seed);
    try {
      auto trained = train(src, tgt, out.mapping, out.projector, *out.kernel, cfg.train, criterion, hooks);
      out.mapping = std::move(trained.mapping);
      out.history = std::move(trained.history);
      out.mmd_normalized = normalized_criterion(out.history.best_criterion, out.chance_criterion);
      if (*out.mmd_normalized < cfg.convergence_floor) {
        fail("MMD training did not converge: normalized criterion " + std::to_string(*out.mmd_normalized) +
             " below floor " + std::to_string(cfg.convergence_floor) + " after " +
             std::to_string(out.history.epochs.size()) + " epochs");
      }
    } catch (const NonConvergence& e) {
      out.status = AlignStatus::kNonConvergence;
      out.diagnostic = e.what();
      spdlog::error("MMD training failed to converge: {}", e.what());
      return out;
    }
  }

  out.stages.push_back({"refine", cfg.enable_refine});
  if (cfg.enable_refine) {
    auto refined = refine(out.mapping, src, tgt, cfg.refine);
    out.mapping = std::move(refined.mapping);
    out.refined_dictionary = std::move(refined.dictionary);
    if (refined.empty_dictionary) spdlog::warn("refinement stopped on an empty induced dictionary");
  }

  out.final_criterion = criterion(out.mapping);
  out.final_normalized = normalized_criterion(out.final_criterion, out.chance_criterion);
  if (!std::isfinite(out.final_criterion)) {
    fail("final criterion is non-finite");
  } else if (out.final_normalized < cfg.convergence_floor) {
    fail("final normalized criterion " + std::to_string(out.final_normalized) + " below floor " +
         std::to_string(cfg.convergence_floor));
  }
  spdlog::info("alignment {}: criterion {:.6f} (chance {:.6f}, normalized {:.4f})", to_string(out.status),
               out.final_criterion, out.chance_criterion, out.final_normalized);
  return out;
}

std::vector<AblationRow> run_ablation(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const Lexicon& gold,
                                      const PipelineConfig& cfg, const RetrievalConfig& eval) {
  const auto make_row = [](std::string name, bool init, bool mmd, bool refine) {
    AblationRow r;
    r.name = std::move(name);
    r.enable_init = init;
    r.enable_mmd = mmd;
    r.enable_refine = refine;
    return r;
  };
  std::vector<AblationRow> rows = {
      make_row("full", true, true, true),
      make_row("w/o MMD-matching", true, false, true),
      make_row("w/o refinement", true, true, false),
      make_row("w/o initialization", false, true, true),
  };
  for (auto& row : rows) {
    PipelineConfig c = cfg;
    c.enable_init = row.enable_init;
    c.enable_mmd = row.enable_mmd;
    c.enable_refine = row.enable_refine;
    spdlog::info("ablation: {}", row.name);
    const auto outcome = run_alignment(src, tgt, c);
    row.status = outcome.status;
    row.criterion = outcome.final_criterion;
    if (outcome.status == AlignStatus::kConverged) row.bli = bli_accuracy(outcome.mapping, src, tgt, gold, eval);
  }
  return rows;
}

}  // namespace mmdalign
