#include "commands.hpp"

#include "mmdalign/evaluator.hpp"
#include "mmdalign/io.hpp"
#include "mmdalign/synthetic.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

namespace mmdalign::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::filesystem::path RunConfig::mapping_path() const {
  return mapping.empty() ? out_dir / "mapping.txt" : mapping;
}

namespace {

std::string join_steps(const std::vector<NormalizeStep>& steps) {
  std::string s;
  for (auto step : steps) s += (s.empty() ? "" : ",") + to_string(step);
  return s.empty() ? "none" : s;
}

json config_json(const RunConfig& cfg) {
  const auto& p = cfg.pipeline;
  return {
      {"src_emb", cfg.src_emb.string()},
      {"tgt_emb", cfg.tgt_emb.string()},
      {"max_vocab", cfg.max_vocab == kUnboundedVocab ? json(nullptr) : json(cfg.max_vocab)},
      {"normalize", join_steps(cfg.normalization)},
      {"seed", cfg.seed},
      {"compress_dim", p.compress_dim},
      {"enable_init", p.enable_init},
      {"enable_mmd", p.enable_mmd},
      {"enable_refine", p.enable_refine},
      {"init_vocab", p.init.vocab_cap},
      {"init_csls", p.init.use_csls},
      {"batch_size", p.train.batch_size},
      {"beta", p.train.beta},
      {"lr", p.train.lr0},
      {"epochs", p.train.max_epochs},
      {"patience", p.train.patience},
      {"sample_vocab", p.train.sample_vocab},
      {"refine_iters", p.refine.refine_iters},
      {"refine_retrieval", to_string(p.refine.method)},
      {"csls_k", p.refine.csls_k},
      {"dict_vocab", p.refine.dict_vocab},
      {"mutual_nn", p.refine.mutual_nn},
      {"criterion_words", p.criterion_words},
      {"convergence_floor", p.convergence_floor},
  };
}

struct Spaces {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
};

Spaces load_spaces(const RunConfig& cfg) {
  if (cfg.src_emb.empty() || cfg.tgt_emb.empty()) throw ConfigError("--src-emb and --tgt-emb are required");
  for (const auto& p : {cfg.src_emb, cfg.tgt_emb}) {
    if (!fs::exists(p)) throw ConfigError("input file not found: " + p.string());
  }
  auto src = load_embeddings(cfg.src_emb, cfg.max_vocab);
  auto tgt = load_embeddings(cfg.tgt_emb, cfg.max_vocab);
  if (src.dim() != tgt.dim()) throw ConfigError("source and target embeddings differ in dimension");
  spdlog::info("loaded {} source and {} target vectors (d = {})", src.size(), tgt.size(), src.dim());
  return {normalize(src, cfg.normalization), normalize(tgt, cfg.normalization)};
}

void ensure_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
}

void write_json_line(std::ostream& out, const json& j) { out << j.dump() << '\n'; }

std::string fmt_fraction(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", 100.0 * *v);
  return buf;
}

}  // namespace

int cmd_align(const RunConfig& cfg) {
  const auto spaces = load_spaces(cfg);
  ensure_out_dir(cfg.out_dir);
  ensure_out_dir(cfg.out_dir / "checkpoints");

  std::vector<fs::path> artifacts;
  std::ofstream history(cfg.out_dir / "history.jsonl");
  if (!history) throw ConfigError("cannot write to " + cfg.out_dir.string());
  artifacts.emplace_back("history.jsonl");

  std::vector<std::pair<std::string, std::string>> ckpt_config;
  const json config = config_json(cfg);
  for (const auto& item : config.items()) {
    const auto& v = item.value();
    std::string value = v.is_string() ? v.get<std::string>() : v.dump();
    if (value.empty()) value = "-";
    for (auto& ch : value) {
      if (ch == ' ' || ch == '\t' || ch == '\n') ch = '_';
    }
    ckpt_config.emplace_back(item.key(), value);
  }

  Projector current_projector;
  TrainHooks hooks;
  hooks.on_step = [&](const StepRecord& r) {
    write_json_line(history, {{"type", "step"}, {"epoch", r.epoch}, {"step", r.step}, {"mmd2", r.mmd2},
                              {"defect", r.defect}});
  };
  hooks.on_epoch = [&](const EpochRecord& r, const MappingMatrix& w) {
    write_json_line(history, {{"type", "epoch"}, {"epoch", r.epoch}, {"lr", r.lr}, {"criterion", r.criterion},
                              {"defect", r.defect}, {"mean_mmd2", r.mean_mmd2}});
    char name[32];
    std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", r.epoch);
    save_checkpoint({r.epoch, r.criterion, r.lr, ckpt_config, w, current_projector},
                    cfg.out_dir / "checkpoints" / name);
    artifacts.push_back(fs::path("checkpoints") / name);
  };

  // The projector is needed inside the epoch hook, before the outcome exists.
  current_projector = make_projector(spaces.tgt, cfg.pipeline.compress_dim);

  const auto outcome = run_alignment(spaces.src, spaces.tgt, cfg.pipeline, hooks);
  history.close();

  save_matrix(outcome.mapping.w, cfg.out_dir / "mapping.txt");
  artifacts.emplace_back("mapping.txt");
  save_checkpoint({outcome.history.best_epoch, outcome.final_criterion, 0.0, ckpt_config, outcome.mapping,
                   outcome.projector},
                  cfg.out_dir / "final.ckpt");
  artifacts.emplace_back("final.ckpt");
  if (!outcome.seed_dictionary.empty()) {
    save_lexicon(to_lexicon(outcome.seed_dictionary, spaces.src.vocab(), spaces.tgt.vocab()),
                 cfg.out_dir / "seed_dictionary.txt");
    artifacts.emplace_back("seed_dictionary.txt");
  }

  const int code = outcome.status == AlignStatus::kConverged ? kSuccess : kNonConvergence;
  json manifest = {
      {"tool", "mmdalign"},
      {"command", "align"},
      {"status", to_string(outcome.status)},
      {"exit_code", code},
      {"diagnostic", outcome.diagnostic},
      {"final_criterion", outcome.final_criterion},
      {"chance_criterion", outcome.chance_criterion},
      {"normalized_criterion", outcome.final_normalized},
      {"best_epoch", outcome.history.best_epoch},
      {"stop_reason", outcome.history.stop_reason},
      {"orthogonality_defect", outcome.mapping.orthogonality_defect()},
      {"config", config_json(cfg)},
  };
  json stages = json::array();
  for (const auto& s : outcome.stages) stages.push_back({{"name", s.name}, {"status", s.ran ? "ran" : "skipped"}});
  manifest["stages"] = stages;
  if (outcome.mmd_normalized) manifest["mmd_normalized_criterion"] = *outcome.mmd_normalized;
  if (outcome.kernel) manifest["bandwidths"] = outcome.kernel->bandwidths();
  json files = json::array();
  for (const auto& a : artifacts) files.push_back({{"path", a.generic_string()}, {"sha256", sha256_file(cfg.out_dir / a)}});
  manifest["artifacts"] = files;
  std::ofstream(cfg.out_dir / "manifest.json") << manifest.dump(2) << '\n';

  std::cout << "status: " << to_string(outcome.status) << "\ncriterion: " << outcome.final_criterion
            << " (normalized " << outcome.final_normalized << ")"
            << "\nmapping: " << (cfg.out_dir / "mapping.txt").string() << '\n';
  if (code != kSuccess) std::cerr << "alignment failed to converge: " << outcome.diagnostic << '\n';
  return code;
}

int cmd_evaluate(const RunConfig& cfg) {
  if (cfg.gold.empty() && cfg.sim_pairs.empty()) throw ConfigError("evaluate needs --gold and/or --sim-pairs");
  const fs::path mapping_file = cfg.mapping_path();
  if (!fs::exists(mapping_file)) throw ConfigError("trained mapping not found: " + mapping_file.string());
  const auto spaces = load_spaces(cfg);
  MappingMatrix w{load_matrix(mapping_file)};
  if (w.dim() != spaces.src.dim()) throw ConfigError("mapping dimension does not match the embeddings");
  ensure_out_dir(cfg.out_dir);
  std::ofstream records(cfg.out_dir / "eval.jsonl");

  RetrievalConfig rc = cfg.pipeline.refine;
  rc.method = cfg.eval_retrieval;
  if (!cfg.gold.empty()) {
    const auto gold = load_lexicon(cfg.gold);
    const auto r = bli_accuracy(w, spaces.src, spaces.tgt, gold, rc, cfg.bucket_cutoff);
    std::printf("Bilingual lexicon induction (%s retrieval)\n", to_string(rc.method).c_str());
    std::printf("  %-10s %8s %8s %10s\n", "bucket", "P@1", "P@5", "n");
    std::printf("  %-10s %8s %8s %10lld\n", "all", fmt_fraction(r.p_at_1).c_str(), fmt_fraction(r.p_at_5).c_str(),
                static_cast<long long>(r.n_evaluated));
    std::printf("  %-10s %8s %8s %10lld\n", "common", fmt_fraction(r.buckets.common_p_at_1).c_str(), "-",
                static_cast<long long>(r.buckets.n_common));
    std::printf("  %-10s %8s %8s %10lld\n", "rare", fmt_fraction(r.buckets.rare_p_at_1).c_str(), "-",
                static_cast<long long>(r.buckets.n_rare));
    std::printf("  skipped (OOV): %lld\n", static_cast<long long>(r.n_skipped_oov));
    write_json_line(records, {{"metric", "p_at_1"}, {"value", r.p_at_1}, {"bucket", "all"}});
    write_json_line(records, {{"metric", "p_at_5"}, {"value", r.p_at_5}, {"bucket", "all"}});
    write_json_line(records, {{"metric", "n_evaluated"}, {"value", r.n_evaluated}, {"bucket", "all"}});
    write_json_line(records, {{"metric", "n_skipped_oov"}, {"value", r.n_skipped_oov}, {"bucket", "all"}});
    if (r.buckets.common_p_at_1) {
      write_json_line(records, {{"metric", "p_at_1"}, {"value", *r.buckets.common_p_at_1}, {"bucket", "common"}});
    }
    if (r.buckets.rare_p_at_1) {
      write_json_line(records, {{"metric", "p_at_1"}, {"value", *r.buckets.rare_p_at_1}, {"bucket", "rare"}});
    }
  }
  if (!cfg.sim_pairs.empty()) {
    const auto pairs = load_similarity_pairs(cfg.sim_pairs);
    const auto s = word_similarity(w, spaces.src, spaces.tgt, pairs);
    std::printf("Cross-lingual word similarity\n  pearson r: %.4f  (pairs used %lld, skipped %lld)\n", s.pearson_r,
                static_cast<long long>(s.n_used), static_cast<long long>(s.n_skipped_oov));
    write_json_line(records, {{"metric", "pearson"}, {"value", s.pearson_r}, {"bucket", "all"}});
  }
  return kSuccess;
}

int cmd_induce(const RunConfig& cfg) {
  const fs::path mapping_file = cfg.mapping_path();
  if (!fs::exists(mapping_file)) throw ConfigError("trained mapping not found: " + mapping_file.string());
  const auto spaces = load_spaces(cfg);
  MappingMatrix w{load_matrix(mapping_file)};
  if (w.dim() != spaces.src.dim()) throw ConfigError("mapping dimension does not match the embeddings");
  ensure_out_dir(cfg.out_dir);
  const auto pairs = induce_dictionary(w, spaces.src, spaces.tgt, cfg.pipeline.refine);
  const auto path = cfg.out_dir / "induced_lexicon.txt";
  save_lexicon(to_lexicon(pairs, spaces.src.vocab(), spaces.tgt.vocab()), path);
  std::cout << "induced " << pairs.size() << " pairs -> " << path.string() << '\n';
  return kSuccess;
}

int cmd_ablate(const RunConfig& cfg) {
  if (cfg.gold.empty()) throw ConfigError("ablate needs --gold");
  if (!fs::exists(cfg.gold)) throw ConfigError("gold lexicon not found: " + cfg.gold.string());
  const auto spaces = load_spaces(cfg);
  const auto gold = load_lexicon(cfg.gold);
  ensure_out_dir(cfg.out_dir);

  RetrievalConfig rc = cfg.pipeline.refine;
  rc.method = cfg.eval_retrieval;
  const auto rows = run_ablation(spaces.src, spaces.tgt, gold, cfg.pipeline, rc);

  std::ofstream tsv(cfg.out_dir / "ablation.tsv");
  std::ofstream jsonl(cfg.out_dir / "ablation.jsonl");
  tsv << "model\tstatus\tp_at_1\tp_at_5\tcriterion\n";
  std::printf("%-22s %10s %8s %8s\n", "model", "status", "P@1", "P@5");
  for (const auto& r : rows) {
    const std::string p1 = r.bli ? fmt_fraction(r.bli->p_at_1) : "*";
    const std::string p5 = r.bli ? fmt_fraction(r.bli->p_at_5) : "*";
    std::printf("%-22s %10s %8s %8s\n", r.name.c_str(), to_string(r.status).c_str(), p1.c_str(), p5.c_str());
    tsv << r.name << '\t' << to_string(r.status) << '\t' << p1 << '\t' << p5 << '\t' << r.criterion << '\n';
    json j = {{"model", r.name}, {"status", to_string(r.status)}, {"criterion", r.criterion}};
    j["p_at_1"] = r.bli ? json(r.bli->p_at_1) : json(nullptr);
    j["p_at_5"] = r.bli ? json(r.bli->p_at_5) : json(nullptr);
    write_json_line(jsonl, j);
  }

  auto p1 = [&](std::size_t i) { return rows[i].bli ? rows[i].bli->p_at_1 : -1.0; };
  const bool ordered = p1(0) >= p1(1) && p1(1) >= p1(2) && rows[3].status == AlignStatus::kNonConvergence;
  std::printf("ordering full >= w/o MMD >= w/o refinement, w/o init = *: %s\n", ordered ? "holds" : "violated");
  if (cfg.check_order && !ordered) return kCheckFailed;
  return kSuccess;
}

int cmd_synth(const SyntheticOptions& opts, const std::filesystem::path& out_dir) {
  ensure_out_dir(out_dir);
  const auto pair = make_synthetic_pair(opts);
  save_embeddings(pair.src, out_dir / "src.vec");
  save_embeddings(pair.tgt, out_dir / "tgt.vec");
  save_lexicon(pair.gold, out_dir / "gold.txt");

  // Similarity pairs scored by the true cross-lingual cosine plus jitter.
  std::mt19937_64 rng(opts.seed + 1);
  std::uniform_int_distribution<Index> pick(0, opts.n - 1);
  std::normal_distribution<double> jitter(0.0, 0.05);
  const Matrix mapped = pair.src.matrix() * pair.rotation;
  std::ofstream sim(out_dir / "sim_pairs.txt");
  for (int k = 0; k < 500; ++k) {
    const Index i = pick(rng);
    const Index j = k % 5 == 0 ? pair.target_of[static_cast<std::size_t>(i)] : pick(rng);
    const auto a = mapped.row(i);
    const auto b = pair.tgt.matrix().row(j);
    const double cos = a.dot(b) / (a.norm() * b.norm());
    sim << pair.src.vocab().word(i) << ' ' << pair.tgt.vocab().word(j) << ' ' << cos + jitter(rng) << '\n';
  }
  std::cout << "wrote synthetic pair (n = " << opts.n << ", d = " << opts.d << ") to " << out_dir.string() << '\n';
  return kSuccess;
}

namespace {

void add_common_options(CLI::App& app, RunConfig& cfg, std::string& normalize_spec, std::string& retrieval,
                        std::string& refine_retrieval, long long& max_vocab) {
  auto& p = cfg.pipeline;
  app.add_option("--src-emb", cfg.src_emb, "Source embeddings (.vec text)");
  app.add_option("--tgt-emb", cfg.tgt_emb, "Target embeddings (.vec text)");
  app.add_option("--gold", cfg.gold, "Gold lexicon (two columns: src tgt)");
  app.add_option("--sim-pairs", cfg.sim_pairs, "Word-similarity pairs (three columns: src tgt score)");
  app.add_option("--out", cfg.out_dir, "Output directory");
  app.add_option("--mapping", cfg.mapping, "Trained mapping for evaluate/induce (default <out>/mapping.txt)");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--max-vocab", max_vocab, "Read at most this many vectors per file (0 = all)");
  app.add_option("--normalize", normalize_spec, "Preprocessing steps, e.g. unit,center,unit or none");
  app.add_option("--compress-dim", p.compress_dim, "Compressed dimension for MMD (0 = no compression)");
  app.add_option("--batch-size", p.train.batch_size, "Minibatch size B");
  app.add_option("--beta", p.train.beta, "Orthogonality retraction strength");
  app.add_option("--lr", p.train.lr0, "Initial learning rate (halved every epoch)");
  app.add_option("--epochs", p.train.max_epochs, "Maximum training epochs");
  app.add_option("--patience", p.train.patience, "Epochs without criterion improvement before stopping");
  app.add_option("--sample-vocab", p.train.sample_vocab, "Sample minibatches from this many frequent words");
  app.add_option("--init-vocab", p.init.vocab_cap, "Words used for initialization signatures");
  app.add_flag("!--init-no-csls", p.init.use_csls, "Plain cosine matching for initialization");
  app.add_option("--refine-iters", p.refine.refine_iters, "Procrustes refinement iterations");
  app.add_option("--refine-retrieval", refine_retrieval, "Refinement dictionary retrieval: nn or csls");
  app.add_option("--csls-k", p.refine.csls_k, "CSLS neighborhood size");
  app.add_option("--dict-vocab", p.refine.dict_vocab, "Words per side used for dictionary induction");
  app.add_option("--criterion-words", p.criterion_words, "Source words scored by the validation criterion");
  app.add_option("--convergence-floor", p.convergence_floor, "Minimum chance-normalized criterion counted as converged");
  app.add_flag("!--no-init", p.enable_init, "Skip initialization (W0 = I)");
  app.add_flag("!--no-mmd", p.enable_mmd, "Skip MMD training");
  app.add_flag("!--no-refine", p.enable_refine, "Skip Procrustes refinement");
  app.add_option("--retrieval", retrieval, "Evaluation retrieval: nn or csls");
  app.add_option("--bucket-cutoff", cfg.bucket_cutoff, "Rank separating common from rare words");
  app.add_flag("--check-order", cfg.check_order, "ablate: non-zero exit when the ablation ordering is violated");
}

}  // namespace

int run(int argc, char** argv) {
  if (!spdlog::get("mmdalign")) spdlog::set_default_logger(spdlog::stderr_color_mt("mmdalign"));
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("MMDALIGN_LOG_LEVEL")) spdlog::cfg::helpers::load_levels(level);

  CLI::App app{"Unsupervised cross-lingual embedding alignment by kernel MMD matching"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  std::string normalize_spec = "unit,center,unit";
  std::string retrieval = "nn";
  std::string refine_retrieval = "csls";
  long long max_vocab = 0;
  add_common_options(app, cfg, normalize_spec, retrieval, refine_retrieval, max_vocab);

  auto* align = app.add_subcommand("align", "Learn a mapping: init -> MMD training -> refinement");
  auto* evaluate = app.add_subcommand("evaluate", "BLI and word-similarity evaluation of a trained mapping");
  auto* induce = app.add_subcommand("induce", "Write the dictionary induced by a trained mapping");
  auto* ablate = app.add_subcommand("ablate", "Full / no-MMD / no-refinement / no-init ablation table");
  auto* synth = app.add_subcommand("synth", "Write a synthetic rotated embedding pair with gold lexicon");
  SyntheticOptions synth_opts;
  synth->add_option("--n", synth_opts.n, "Vectors per side");
  synth->add_option("--d", synth_opts.d, "Dimension");
  synth->add_option("--noise", synth_opts.noise, "Target noise std");
  synth->add_option("--spectrum-ratio", synth_opts.spectrum_ratio, "Largest / smallest source axis std");
  synth->add_flag("!--no-shuffle", synth_opts.shuffle, "Keep target rows aligned with source rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    cfg.normalization = parse_normalize_steps(normalize_spec);
    cfg.eval_retrieval = parse_retrieval_method(retrieval);
    cfg.pipeline.refine.method = parse_retrieval_method(refine_retrieval);
    cfg.max_vocab = max_vocab > 0 ? static_cast<Index>(max_vocab) : kUnboundedVocab;
    cfg.pipeline.train.seed = cfg.seed;
    cfg.pipeline.validate();

    if (align->parsed()) return cmd_align(cfg);
    if (evaluate->parsed()) return cmd_evaluate(cfg);
    if (induce->parsed()) return cmd_induce(cfg);
    if (ablate->parsed()) return cmd_ablate(cfg);
    if (synth->parsed()) {
      synth_opts.seed = cfg.seed;
      return cmd_synth(synth_opts, cfg.out_dir);
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const NonConvergence& e) {
    spdlog::error("{}", e.what());
    return kNonConvergence;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::critical("internal error: {}", e.what());
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace mmdalign::cli
