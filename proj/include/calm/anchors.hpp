#pragma once

#include <string>
#include <vector>

#include "calm/tensor.hpp"

namespace calm {

enum class Modality { Video, Text };

/// Per-sample probability vectors over the K class anchors, one row per
/// sample. Video rows are inter-modal, text rows intra-modal.
struct AnchorDistribution {
  Tensor probs;  // [B×K]
  Modality modality = Modality::Video;
};

/// Sharpness of the anchor softmax. When learnable, the trained parameter
/// is log τ so τ stays positive.
class Temperature {
 public:
  explicit Temperature(double tau, bool learnable = false);

  double value() const;
  bool learnable() const { return learnable_; }
  /// τ as a one-element tensor on the tape.
  Tensor as_tensor(Tape& tape) const;
  /// The learnable log τ (requires_grad iff learnable).
  const Tensor& log_tau() const { return log_tau_; }
  Tensor& log_tau() { return log_tau_; }

 private:
  bool learnable_;
  double tau_;
  Tensor log_tau_;
};

/// Frozen anchor embeddings plus learnable per-anchor offsets:
/// P = base + positional.
class AnchorSet {
 public:
  AnchorSet(Tensor base, std::vector<std::string> labels,
            std::string prompt_template = "The content of [label]");

  std::size_t size() const { return base_.rows(); }
  std::size_t dim() const { return base_.cols(); }
  const Tensor& base() const { return base_; }
  const Tensor& positional() const { return positional_; }
  Tensor& positional() { return positional_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& prompt_template() const { return template_; }

  /// P = base + positional, recorded so gradients reach `positional`.
  Tensor effective(Tape& tape) const;

  /// Row-permuted copy (labels and positional follow the rows).
  AnchorSet permuted(const std::vector<std::size_t>& order) const;

 private:
  Tensor base_;
  Tensor positional_;
  std::vector<std::string> labels_;
  std::string template_;
};

struct VideoFeatures {
  Tensor frames;  // [T×D]
};

struct TextFeatures {
  Tensor cls;  // [D] or [1×D]
};

/// Temporal fusion: arithmetic mean of the frame rows, [T×D] -> [D].
Tensor fuse_frames(Tape& tape, const Tensor& frames);

/// softmax(τ · cos(features, P)) row by row; features is [B×D].
AnchorDistribution anchor_distribution(Tape& tape, const Tensor& features, const Tensor& anchors,
                                       const Tensor& tau, Modality modality);

AnchorDistribution video_anchor_distribution(Tape& tape, const VideoFeatures& video,
                                             const AnchorSet& anchors, const Temperature& tau);
AnchorDistribution text_anchor_distribution(Tape& tape, const TextFeatures& text,
                                            const AnchorSet& anchors, const Temperature& tau);

}  // namespace calm
