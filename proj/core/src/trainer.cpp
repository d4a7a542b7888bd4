#include "mmdalign/trainer.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <random>

namespace mmdalign {

void TrainConfig::validate() const {
  if (batch_size < 2) throw ConfigError("batch size must be >= 2");
  if (!(beta > 0.0 && beta < 0.5)) throw ConfigError("beta must lie in (0, 0.5)");
  if (!(lr0 > 0.0)) throw ConfigError("learning rate must be positive");
  if (max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (sample_vocab < 1) throw ConfigError("sample_vocab must be >= 1");
}

double TrainConfig::learning_rate(int epoch) const { return std::ldexp(lr0, -epoch); }

Matrix orthogonality_retraction(const Matrix& w, double beta) {
  return (1.0 + beta) * w - beta * ((w * w.transpose()) * w);
}

Matrix retract_until(const Matrix& w, double beta, double tol, int max_iters) {
  const Matrix eye = Matrix::Identity(w.cols(), w.cols());
  Matrix out = w;
  double defect = (out.transpose() * out - eye).norm();
  for (int i = 0; i < max_iters && defect > tol; ++i) {
    Matrix next = orthogonality_retraction(out, beta);
    const double next_defect = (next.transpose() * next - eye).norm();
    if (!(next_defect < defect)) break;  // outside the contraction region
    out = std::move(next);
    defect = next_defect;
  }
  return out;
}

AdamStep adam_step(const Matrix& w, const Matrix& grad, AdamState state, double lr, const AdamParams& params) {
  if (grad.rows() != w.rows() || grad.cols() != w.cols()) throw Error("adam_step: gradient shape mismatch");
  if (state.step == 0) {
    state.m = Matrix::Zero(w.rows(), w.cols());
    state.v = Matrix::Zero(w.rows(), w.cols());
  }
  ++state.step;
  state.m = params.beta1 * state.m + (1.0 - params.beta1) * grad;
  state.v = params.beta2 * state.v + (1.0 - params.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.step));
  const Matrix m_hat = state.m / c1;
  const Matrix v_hat = state.v / c2;
  Matrix next = w - lr * (m_hat.array() / (v_hat.array().sqrt() + params.epsilon)).matrix();
  return {std::move(next), std::move(state)};
}

Index steps_per_epoch(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const TrainConfig& cfg) {
  const Index range = cfg.sample_full_vocab ? std::max(src.size(), tgt.size())
                                            : std::min(cfg.sample_vocab, std::max(src.size(), tgt.size()));
  return (range + cfg.batch_size - 1) / cfg.batch_size;
}

TrainResult train(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const MappingMatrix& w0,
                  const Projector& proj, const KernelSpec& spec, const TrainConfig& cfg, const Criterion& criterion,
                  const TrainHooks& hooks) {
  cfg.validate();
  if (src.dim() != tgt.dim() || w0.dim() != src.dim()) throw ConfigError("train: dimension mismatch");
  if (!criterion) throw ConfigError("train: a validation criterion is required");

  const Index src_range = cfg.sample_full_vocab ? src.size() : std::min(cfg.sample_vocab, src.size());
  const Index tgt_range = cfg.sample_full_vocab ? tgt.size() : std::min(cfg.sample_vocab, tgt.size());
  const Index steps = steps_per_epoch(src, tgt, cfg);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Index> pick_src(0, src_range - 1);
  std::uniform_int_distribution<Index> pick_tgt(0, tgt_range - 1);
  std::vector<Index> src_rows(static_cast<std::size_t>(cfg.batch_size));
  std::vector<Index> tgt_rows(static_cast<std::size_t>(cfg.batch_size));

  TrainResult result{w0, {}};
  TrainHistory& hist = result.history;
  MappingMatrix w = w0;
  AdamState adam;
  long global_step = 0;
  int stale = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const double lr = cfg.learning_rate(epoch);
    double mmd_sum = 0.0;
    for (Index s = 0; s < steps; ++s) {
      for (auto& r : src_rows) r = pick_src(rng);
      for (auto& r : tgt_rows) r = pick_tgt(rng);
      const Matrix xb = gather_rows(src.matrix(), src_rows);
      const Matrix yb = gather_rows(tgt.matrix(), tgt_rows);

      const auto obj = mmd2_value_and_gradient(w, xb, yb, proj, spec);
      if (!std::isfinite(obj.value) || !obj.gradient.allFinite()) {
        throw NonConvergence("MMD objective became non-finite at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(global_step));
      }
      auto updated = adam_step(w.w, obj.gradient, std::move(adam), lr);
      adam = std::move(updated.state);
      w.w = orthogonality_retraction(updated.w, cfg.beta);
      if (w.orthogonality_defect() > kTrainingDefectBound) {
        w.w = retract_until(w.w, cfg.beta, kTrainingDefectBound);
      }
      if (!w.w.allFinite()) throw NonConvergence("mapping became non-finite at step " + std::to_string(global_step));

      StepRecord rec{epoch, global_step, obj.value, w.orthogonality_defect()};
      hist.steps.push_back(rec);
      if (hooks.on_step) hooks.on_step(rec);
      mmd_sum += obj.value;
      ++global_step;
    }

    const MappingMatrix snapshot{retract_until(w.w, cfg.beta, kSnapshotDefectBound)};
    EpochRecord er{epoch, lr, criterion(snapshot), w.orthogonality_defect(), mmd_sum / static_cast<double>(steps)};
    if (!std::isfinite(er.criterion)) throw NonConvergence("validation criterion is non-finite");
    hist.epochs.push_back(er);
    if (hooks.on_epoch) hooks.on_epoch(er, snapshot);
    spdlog::info("epoch {}: lr={:.3g} mmd2={:.6g} criterion={:.6f} defect={:.3g}", epoch, lr, er.mean_mmd2,
                 er.criterion, er.defect);

    if (hist.best_epoch < 0 || er.criterion > hist.best_criterion) {
      hist.best_epoch = epoch;
      hist.best_criterion = er.criterion;
      result.mapping = snapshot;
      stale = 0;
    } else if (++stale >= cfg.patience) {
      hist.stop_reason = "patience";
      break;
    }
  }
  if (hist.stop_reason.empty()) hist.stop_reason = "max_epochs";
  return result;
}

}  // namespace mmdalign
