#include "calm/trainer.hpp"

#include <cmath>
#include <fstream>

#include "calm/checkpoint.hpp"
#include "calm/error.hpp"
#include "calm/store.hpp"

namespace calm {

using nlohmann::ordered_json;

namespace {

ordered_json to_json(const LossReport& r) {
  return {{"total", r.total}, {"task", r.task},           {"rec", r.rec},
          {"kl", r.kl},       {"weighted_kl", r.weighted_kl}, {"alignment", r.alignment}};
}

ordered_json to_json(const RetrievalMetrics& m) {
  return {{"r1", m.r1}, {"r5", m.r5}, {"r10", m.r10}, {"mnr", m.mnr}, {"n_queries", m.n_queries}};
}

ordered_json to_json(const EvalRecord& e) {
  return {{"type", "eval"},
          {"epoch", e.epoch},
          {"step", e.step},
          {"train_batches", e.train_batches},
          {"train", to_json(e.train_mean)},
          {"val", to_json(e.val)}};
}

void accumulate(LossReport& acc, const LossReport& r) {
  acc.task += r.task;
  acc.rec += r.rec;
  acc.kl += r.kl;
  acc.weighted_kl += r.weighted_kl;
  acc.alignment += r.alignment;
  acc.total += r.total;
}

LossReport divided(LossReport r, std::size_t n) {
  if (n == 0) return r;
  const double d = static_cast<double>(n);
  r.task /= d;
  r.rec /= d;
  r.kl /= d;
  r.weighted_kl /= d;
  r.alignment /= d;
  r.total /= d;
  return r;
}

}  // namespace

CalmModel build_model(const RunConfig& config, const Corpus& corpus) {
  if (!corpus.anchors.defined())
    throw ConfigError("manifest has no anchor_store; anchors are required to build the model");
  Rng init_rng(config.seed, "init");
  return CalmModel::init(config.model,
                         AnchorSet(corpus.anchors, corpus.manifest.labels,
                                   corpus.manifest.prompt_template),
                         init_rng);
}

RetrievalMetrics evaluate(const CalmModel& model, const Corpus& corpus, const std::string& split) {
  const auto indices = corpus.split_indices(split);
  if (indices.empty()) throw EmptyInputError("split '" + split + "' is empty");
  const Batch batch = corpus.gather(indices);
  Tape tape;
  const Tensor video = model.video_features(tape, batch.frames, batch.frames_per_video);
  const Tensor text = model.text_features(tape, batch.text);
  const auto ranks = rank_of_truth(text_to_video(text, video));
  return summarize(ranks);
}

ordered_json run_header(const RunConfig& config, const Corpus& corpus,
                        const std::vector<std::string>& notes) {
  ordered_json deviations = ordered_json::array();
  auto note = [&deviations](const std::string& key, const ordered_json& run,
                            const ordered_json& reference) {
    if (run != reference)
      deviations.push_back({{"key", key}, {"run", run}, {"full_scale", reference}});
  };
  note("optim.lr", config.optim.lr, 1e-5);
  note("optim.batch_size", config.optim.batch_size, 128);
  note("optim.epochs", config.optim.epochs, 5);
  note("model.latent_dim", config.model.latent_dim, 256);
  note("anchors.count", corpus.anchors.defined() ? corpus.anchors.rows() : 0, 157);
  note("data.frames_per_video", corpus.manifest.frames_per_video, 12);

  ordered_json h;
  h["type"] = "header";
  h["config"] = to_json(config);
  h["data_checksum"] = corpus.checksum;
  h["resolved"] = {{"anchors", corpus.anchors.defined() ? corpus.anchors.rows() : 0},
                   {"feature_dim", corpus.dim()},
                   {"frames_per_video", corpus.manifest.frames_per_video},
                   {"train_size", corpus.split_indices("train").size()}};
  h["init"] = "weights U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases and positional zero; "
              "adapters identity";
  h["deviations"] = std::move(deviations);
  h["notes"] = notes;
  return h;
}

TrainResult train(const RunConfig& config, const Corpus& corpus, const TrainOptions& options) {
  config.validate();
  const auto train_indices = corpus.split_indices("train");
  if (train_indices.empty()) throw EmptyInputError("train split is empty");

  CalmModel model = build_model(config, corpus);
  const auto params = model.parameters();
  AdamWState state = make_adamw_state(params);

  Rng shuffle_rng(config.seed, "shuffle");
  Rng eps_rng(config.seed, "eps");
  Rng dropout_rng(config.seed, "dropout");

  const std::filesystem::path out_dir = config.output_dir;
  std::ofstream log;
  const ordered_json header = run_header(config, corpus, options.notes);
  if (options.write_outputs) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    ordered_json replay = to_json(config);
    store::write_text_atomic(out_dir / "run_header.json", header.dump(2) + "\n");
    store::write_text_atomic(out_dir / "config.resolved.json", replay.dump(2) + "\n");
    log.open(out_dir / "metrics.jsonl", std::ios::trunc);
    if (!log) throw IoError("cannot write " + (out_dir / "metrics.jsonl").string());
    log << header.dump() << '\n' << std::flush;
  }

  std::vector<LossReport> step_losses;
  std::vector<EvalRecord> evaluations;
  ordered_json history = ordered_json::array();
  std::size_t step = 0;
  std::size_t best_epoch = 0;
  RetrievalMetrics best_val;
  CalmModel best_model = model.clone();

  auto checkpoint_meta = [&](std::size_t epoch) {
    ordered_json meta;
    meta["format"] = "calm-checkpoint";
    meta["config"] = to_json(config);
    meta["epoch"] = epoch;
    meta["step"] = step;
    meta["data_checksum"] = corpus.checksum;
    meta["metrics"] = history;
    meta["init"] = header["init"];
    return meta;
  };

  auto record_eval = [&](std::size_t epoch, const LossReport& mean, std::size_t batches) {
    EvalRecord rec{epoch, step, batches, mean, evaluate(model, corpus, "val")};
    history.push_back(to_json(rec));
    const bool improved = evaluations.empty() || rec.val.r1 > best_val.r1;
    evaluations.push_back(rec);
    if (improved) {
      best_val = rec.val;
      best_epoch = epoch;
      best_model = model.clone();
      if (options.write_outputs) write_checkpoint(out_dir / "best.ckpt", model, checkpoint_meta(epoch));
    }
    if (options.write_outputs) log << to_json(rec).dump() << '\n' << std::flush;
    if (options.progress) {
      *options.progress << "epoch " << epoch << " step " << step << " loss " << mean.total
                        << " val " << rec.val.to_json_text() << '\n';
    }
  };

  record_eval(0, LossReport{}, 0);

  const std::size_t bs = config.optim.batch_size;
  bool capped = false;
  for (std::size_t epoch = 1; epoch <= config.optim.epochs && !capped; ++epoch) {
    auto order = train_indices;
    shuffle_rng.shuffle(order);
    LossReport sum;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      const Batch batch = corpus.gather({order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(end)});
      const CvaeNoise noise = sample_noise(model.cvae.shape, batch.size(), eps_rng, dropout_rng, true);

      Tape tape;
      TotalLoss loss = total_loss(tape, batch, model, config.loss, noise);
      if (!std::isfinite(loss.report.total)) {
        if (options.write_outputs) {
          log << ordered_json{{"type", "abort"}, {"step", step + 1}, {"reason", "non-finite loss"}}.dump()
              << '\n' << std::flush;
        }
        throw NumericError("non-finite loss at step " + std::to_string(step + 1) +
                           "; last good checkpoint kept");
      }
      for (const auto& p : params) {
        Tensor t = p.tensor;
        t.zero_grad();
      }
      tape.backward(loss.total);
      adamw_step(params, state, config.optim);
      ++step;
      step_losses.push_back(loss.report);
      accumulate(sum, loss.report);
      ++batches;
      if (config.optim.max_steps != 0 && step >= config.optim.max_steps) {
        capped = true;
        break;
      }
    }
    record_eval(epoch, divided(sum, batches), batches);
  }

  if (options.write_outputs) write_checkpoint(out_dir / "final.ckpt", model, checkpoint_meta(evaluations.back().epoch));

  return TrainResult{std::move(step_losses), std::move(evaluations), best_epoch, best_val,
                     std::move(model), std::move(best_model), corpus.checksum};
}

}  // namespace calm
