#include "calm/objective.hpp"

#include "calm/error.hpp"
#include "calm/ops.hpp"

namespace calm {

std::string to_string(AlignMode mode) {
  switch (mode) {
    case AlignMode::Calm: return "CALM";
    case AlignMode::KlDiv: return "KL_DIV";
    case AlignMode::CrossEntropy: return "CROSS_ENTROPY";
    case AlignMode::Mse: return "MSE";
    case AlignMode::Baseline: return "BASELINE";
  }
  return "?";
}

AlignMode align_mode_from_string(const std::string& name) {
  for (AlignMode m : {AlignMode::Calm, AlignMode::KlDiv, AlignMode::CrossEntropy, AlignMode::Mse,
                      AlignMode::Baseline}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown loss mode '" + name +
                    "' (expected CALM, KL_DIV, CROSS_ENTROPY, MSE or BASELINE)");
}

Tensor task_loss(Tape& tape, const Tensor& video, const Tensor& text, double temp) {
  const std::size_t batch = video.rows();
  if (batch == 0 || video.size() == 0) throw EmptyInputError("task_loss: empty batch");
  if (text.rows() != batch) {
    throw DimensionError("task_loss: " + shape_string(video.shape()) + " videos vs " +
                         shape_string(text.shape()) + " texts");
  }
  std::vector<double> eye(batch * batch, 0.0);
  for (std::size_t i = 0; i < batch; ++i) eye[i * batch + i] = 1.0;
  const Tensor diag({batch, batch}, std::move(eye));

  Tensor logits = ops::scale(tape, ops::cosine_rows(tape, video, text), temp);
  Tensor v2t = ops::sum(tape, ops::mul(tape, ops::log_softmax_rows(tape, logits), diag));
  Tensor t2v = ops::sum(
      tape, ops::mul(tape, ops::log_softmax_rows(tape, ops::transpose(tape, logits)), diag));
  return ops::scale(tape, ops::add(tape, v2t, t2v), -0.5 / static_cast<double>(batch));
}

Tensor alignment_loss(Tape& tape, const AnchorDistribution& vp, const AnchorDistribution& sp,
                      const CvaeOutput* cvae, const LossConfig& config) {
  if (vp.probs.shape() != sp.probs.shape()) {
    throw DimensionError("alignment_loss: V_p " + shape_string(vp.probs.shape()) + " vs S_p " +
                         shape_string(sp.probs.shape()));
  }
  const double batch = static_cast<double>(vp.probs.rows());
  auto safe_log = [&tape](const Tensor& p) {
    return ops::log(tape, ops::clamp_min(tape, p, ops::kProbFloor));
  };
  switch (config.mode) {
    case AlignMode::Calm:
      if (cvae == nullptr) throw ContractError("alignment_loss: CALM mode needs the VAE output");
      return ops::add(tape, cvae->rec, ops::scale(tape, cvae->kl, config.alpha));
    case AlignMode::KlDiv: {
      Tensor diff = ops::sub(tape, safe_log(sp.probs), safe_log(vp.probs));
      return ops::scale(tape, ops::sum(tape, ops::mul(tape, sp.probs, diff)), 1.0 / batch);
    }
    case AlignMode::CrossEntropy:
      return ops::scale(tape, ops::sum(tape, ops::mul(tape, sp.probs, safe_log(vp.probs))),
                        -1.0 / batch);
    case AlignMode::Mse:
      return ops::mean(tape, ops::square(tape, ops::sub(tape, vp.probs, sp.probs)));
    case AlignMode::Baseline:
      return Tensor::scalar(0.0);
  }
  throw ContractError("alignment_loss: unknown mode");
}

TotalLoss total_loss(Tape& tape, const Batch& batch, const CalmModel& model,
                     const LossConfig& config, const CvaeNoise& noise,
                     const Tensor& fixed_target) {
  if (batch.size() == 0) throw EmptyInputError("total_loss: empty batch");
  if (config.alpha < 0.0) throw ConfigError("alpha must be non-negative");

  Tensor video = model.video_features(tape, batch.frames, batch.frames_per_video);
  Tensor text = model.text_features(tape, batch.text);

  TotalLoss out;
  Tensor task = task_loss(tape, video, text, config.task_temperature);
  out.report.task = task.item();
  if (config.mode == AlignMode::Baseline) {
    out.total = task;
    out.report.total = task.item();
    return out;
  }

  Tensor anchors = model.anchors.effective(tape);
  Tensor tau = model.temperature.as_tensor(tape);
  AnchorDistribution vp = anchor_distribution(tape, video, anchors, tau, Modality::Video);
  AnchorDistribution sp = anchor_distribution(tape, text, anchors, tau, Modality::Text);

  Tensor align;
  if (config.mode == AlignMode::Calm) {
    AnchorDistribution target = sp;
    if (fixed_target.defined()) {
      // only meaningful for the blocked target, where S_p is a constant label anyway
      if (!config.block_target_grad)
        throw ContractError("total_loss: a fixed target needs block_target_grad");
      if (fixed_target.shape() != sp.probs.shape())
        throw DimensionError("total_loss: fixed target " + shape_string(fixed_target.shape()) +
                             " vs S_p " + shape_string(sp.probs.shape()));
      target.probs = fixed_target;
    }
    out.target = target.probs.detach();
    CvaeOutput cv = cvae_forward(tape, vp, target, model.cvae, noise,
                                 CvaeOptions{config.block_target_grad});
    align = alignment_loss(tape, vp, sp, &cv, config);
    out.report.rec = cv.rec.item();
    out.report.kl = cv.kl.item();
    out.report.weighted_kl = config.alpha * cv.kl.item();
  } else {
    align = alignment_loss(tape, vp, sp, nullptr, config);
    out.report.alignment = align.item();
  }
  out.total = ops::add(tape, task, align);
  out.report.total = out.total.item();
  return out;
}

}  // namespace calm
