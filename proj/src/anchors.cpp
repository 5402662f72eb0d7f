#include "calm/anchors.hpp"

#include <algorithm>
#include <cmath>

#include "calm/error.hpp"
#include "calm/ops.hpp"

namespace calm {

Temperature::Temperature(double tau, bool learnable) : learnable_(learnable), tau_(tau) {
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw ContractError("temperature must be positive and finite, got " + std::to_string(tau));
  log_tau_ = Tensor({1}, {std::log(tau)}, learnable);
}

double Temperature::value() const { return learnable_ ? std::exp(log_tau_[0]) : tau_; }

Tensor Temperature::as_tensor(Tape& tape) const {
  if (learnable_) return ops::exp(tape, log_tau_);
  return Tensor({1}, {value()});
}

AnchorSet::AnchorSet(Tensor base, std::vector<std::string> labels, std::string prompt_template)
    : base_(base.detach()), labels_(std::move(labels)), template_(std::move(prompt_template)) {
  if (base_.rank() != 2 || base_.rows() == 0)
    throw ContractError("anchor set needs a non-empty K×D matrix, got " +
                        shape_string(base_.shape()));
  if (labels_.size() != base_.rows()) {
    throw ContractError("anchor set has " + std::to_string(base_.rows()) + " rows but " +
                        std::to_string(labels_.size()) + " labels");
  }
  positional_ = Tensor::zeros(base_.shape(), true);
}

Tensor AnchorSet::effective(Tape& tape) const { return ops::add(tape, base_, positional_); }

AnchorSet AnchorSet::permuted(const std::vector<std::size_t>& order) const {
  if (order.size() != size()) throw ContractError("permutation length differs from K");
  const std::size_t d = dim();
  std::vector<double> b(size() * d), p(size() * d);
  std::vector<std::string> labels(size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t src = order[i];
    for (std::size_t j = 0; j < d; ++j) {
      b[i * d + j] = base_[src * d + j];
      p[i * d + j] = positional_[src * d + j];
    }
    labels[i] = labels_[src];
  }
  AnchorSet out(Tensor(base_.shape(), std::move(b)), std::move(labels), template_);
  std::copy(p.begin(), p.end(), out.positional_.mutable_data().begin());
  return out;
}

Tensor fuse_frames(Tape& tape, const Tensor& frames) {
  if (frames.size() == 0 || frames.rows() == 0)
    throw EmptyInputError("fuse_frames: video has no frames");
  return ops::reshape(tape, ops::mean_rows(tape, frames), {frames.cols()});
}

AnchorDistribution anchor_distribution(Tape& tape, const Tensor& features, const Tensor& anchors,
                                       const Tensor& tau, Modality modality) {
  if (tau.size() != 1 || !(tau[0] > 0.0))
    throw ContractError("anchor temperature must be a positive scalar");
  Tensor sims = ops::cosine_rows(tape, features, anchors);
  return {ops::softmax_rows(tape, ops::scale_by(tape, sims, tau)), modality};
}

AnchorDistribution video_anchor_distribution(Tape& tape, const VideoFeatures& video,
                                             const AnchorSet& anchors, const Temperature& tau) {
  Tensor fused = fuse_frames(tape, video.frames);
  return anchor_distribution(tape, fused, anchors.effective(tape), tau.as_tensor(tape),
                             Modality::Video);
}

AnchorDistribution text_anchor_distribution(Tape& tape, const TextFeatures& text,
                                            const AnchorSet& anchors, const Temperature& tau) {
  return anchor_distribution(tape, text.cls, anchors.effective(tape), tau.as_tensor(tape),
                             Modality::Text);
}

}  // namespace calm
