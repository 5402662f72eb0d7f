#include "calm/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iomanip>

#include "calm/anchors.hpp"
#include "calm/checkpoint.hpp"
#include "calm/config.hpp"
#include "calm/error.hpp"
#include "calm/harness.hpp"
#include "calm/manifest.hpp"
#include "calm/retrieval.hpp"
#include "calm/store.hpp"
#include "calm/synthetic.hpp"
#include "calm/trainer.hpp"

namespace calm {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

/// Applies CALM_SEED if set; returns a note for the run header.
std::vector<std::string> apply_seed_override(RunConfig& config, std::ostream& err) {
  const char* env = std::getenv("CALM_SEED");
  if (env == nullptr || *env == '\0') return {};
  char* end = nullptr;
  const unsigned long long seed = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0') throw ConfigError("CALM_SEED is not an unsigned integer: " + std::string(env));
  const std::string note = "seed overridden by CALM_SEED=" + std::string(env) + " (config had " +
                           std::to_string(config.seed) + ")";
  err << note << '\n';
  config.seed = seed;
  config.optim.seed = seed;
  return {note};
}

Corpus load_configured_corpus(const RunConfig& config) {
  if (config.manifest.empty()) throw ConfigError("data.manifest is required for this command");
  return load_corpus(config.manifest);
}

int cmd_gen_data(const std::string& config_path, const std::string& out_dir, bool force,
                 std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(config_path);
  apply_seed_override(config, err);
  const fs::path dir = out_dir;
  if (fs::exists(dir) && !fs::is_directory(dir))
    throw IoError(dir.string() + " exists and is not a directory");
  if (fs::exists(dir) && !fs::is_empty(dir) && !force)
    throw IoError(dir.string() + " is not empty (use --force to overwrite)");
  const SyntheticData data = generate_synthetic(config.synthetic, config.seed);
  for (const auto& [name, sum] : write_synthetic(data, dir)) out << sum << "  " << name << '\n';
  return kExitOk;
}

int cmd_train(const std::string& config_path, bool quiet, std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(config_path);
  TrainOptions opts;
  opts.notes = apply_seed_override(config, err);
  opts.progress = quiet ? nullptr : &err;
  const Corpus corpus = load_configured_corpus(config);
  const TrainResult result = train(config, corpus, opts);
  ordered_json summary;
  summary["best_epoch"] = result.best_epoch;
  summary["steps"] = result.step_losses.size();
  summary["best_val"] = ordered_json::parse(result.best_val.to_json_text());
  summary["checkpoint"] = (fs::path(config.output_dir) / "best.ckpt").string();
  out << summary.dump() << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& split,
             const std::string& manifest_override, std::size_t top_anchors, std::ostream& out) {
  const Checkpoint ck = read_checkpoint(checkpoint_path);
  const CalmModel model = model_from_checkpoint(ck);
  std::string manifest = manifest_override;
  if (manifest.empty()) manifest = ck.metadata.at("config").at("data").at("manifest").get<std::string>();
  if (manifest.empty()) throw ConfigError("checkpoint config has no data.manifest; pass --manifest");
  const Corpus corpus = load_corpus(manifest);
  const RetrievalMetrics metrics = evaluate(model, corpus, split);
  out << metrics.to_json_text() << '\n';

  if (top_anchors > 0) {
    const auto indices = corpus.split_indices(split);
    const std::size_t n = std::min<std::size_t>(3, indices.size());
    const Batch batch = corpus.gather({indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n)});
    Tape tape;
    const Tensor video = model.video_features(tape, batch.frames, batch.frames_per_video);
    const Tensor text = model.text_features(tape, batch.text);
    const Tensor anchors = model.anchors.effective(tape);
    const Tensor tau = model.temperature.as_tensor(tape);
    const auto vp = anchor_distribution(tape, video, anchors, tau, Modality::Video);
    const auto sp = anchor_distribution(tape, text, anchors, tau, Modality::Text);
    const std::size_t k = std::min(top_anchors, model.anchors.size());
    const std::size_t width = model.anchors.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto* dist : {&vp, &sp}) {
        std::span<const double> row = dist->probs.data().subspan(i * width, width);
        out << corpus.manifest.ids[indices[i]] << ' '
            << (dist->modality == Modality::Video ? "video" : "text ") << ':';
        for (const auto& a : top_anchor_report(row, model.anchors.labels(), k))
          out << ' ' << a.label << '=' << std::fixed << std::setprecision(4) << a.prob;
        out << std::defaultfloat << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_gradcheck(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(config_path);
  apply_seed_override(config, err);
  const GradcheckReport report = model_gradcheck(config);
  for (const auto& e : report.entries) {
    out << std::left << std::setw(28) << e.name << std::right << std::setw(6) << e.elements
        << "  max_rel_err " << std::scientific << std::setprecision(3) << e.max_rel_error
        << std::defaultfloat << '\n';
  }
  out << "max_rel_err " << std::scientific << std::setprecision(3) << report.max_rel_error
      << " tolerance " << config.gradcheck.tolerance << std::defaultfloat << '\n';
  return report.max_rel_error <= config.gradcheck.tolerance ? kExitOk : kExitGradcheck;
}

int cmd_ablate(const std::string& config_path, std::ostream& out, std::ostream& err) {
  RunConfig config = load_run_config(config_path);
  apply_seed_override(config, err);
  const Corpus corpus = load_configured_corpus(config);
  const auto rows = run_ablation(config, corpus, true);
  const auto json = ablation_json(rows, config);
  const std::string table = ablation_table(rows);
  const fs::path dir = config.output_dir;
  store::write_text_atomic(dir / "ablation.json", json.dump(2) + "\n");
  store::write_text_atomic(dir / "ablation.txt", table);
  out << table << json.dump() << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class-anchor alignment head: data generation, training, evaluation, checks"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint_path, split = "test", manifest;
  bool force = false, quiet = false;
  std::size_t top_anchors = 0;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic paired-embedding corpus");
  gen->add_option("--config", config_path, "Run config JSON")->required();
  gen->add_option("--out", out_dir, "Output directory")->required();
  gen->add_flag("--force", force, "Allow writing into a non-empty directory");

  auto* tr = app.add_subcommand("train", "Train the alignment head");
  tr->add_option("--config", config_path, "Run config JSON")->required();
  tr->add_flag("--quiet", quiet, "No per-epoch progress on stderr");

  auto* ev = app.add_subcommand("eval", "Text-to-video retrieval metrics of a checkpoint");
  ev->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  ev->add_option("--split", split, "train, val or test");
  ev->add_option("--manifest", manifest, "Override the manifest recorded in the checkpoint");
  ev->add_option("--top-anchors", top_anchors, "Print the top-k anchors of the first samples");

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the full loss");
  gc->add_option("--config", config_path, "Run config JSON")->required();

  auto* ab = app.add_subcommand("ablate", "Compare alignment losses under a shared seed");
  ab->add_option("--config", config_path, "Run config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(config_path, out_dir, force, out, err);
    if (tr->parsed()) return cmd_train(config_path, quiet, out, err);
    if (ev->parsed()) return cmd_eval(checkpoint_path, split, manifest, top_anchors, out);
    if (gc->parsed()) return cmd_gradcheck(config_path, out, err);
    if (ab->parsed()) return cmd_ablate(config_path, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "unexpected error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace calm
