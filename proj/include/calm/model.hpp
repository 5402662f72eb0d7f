#pragma once

#include <vector>

#include "calm/anchors.hpp"
#include "calm/cvae.hpp"
#include "calm/gradcheck.hpp"
#include "calm/rng.hpp"

namespace calm {

struct ModelConfig {
  std::size_t latent_dim = 256;
  std::size_t hidden_dim = 128;
  Activation activation = Activation::Tanh;
  double dropout = 0.1;
  double temperature = 5.0;
  bool learn_temperature = false;
};

/// A mini-batch of paired samples. Frames are grouped per video:
/// rows [b·T, (b+1)·T) belong to sample b.
struct Batch {
  Tensor frames;  // [B·T×D]
  Tensor text;    // [B×D]
  std::size_t frames_per_video = 1;

  std::size_t size() const { return text.rows(); }
};

/// The trainable head: feature adapters, anchors with positional offsets,
/// temperature and the cross-modal VAE.
///
/// The adapters are D×D linear maps initialised to the identity; they are
/// the only path by which the task loss can move retrieval geometry when
/// the upstream encoders are frozen embedding files.
struct CalmModel {
  ModelConfig config;
  AnchorSet anchors;
  Temperature temperature;
  Linear video_adapter;
  Linear text_adapter;
  CvaeParams cvae;

  static CalmModel init(const ModelConfig& config, AnchorSet anchors, Rng& init_rng);

  /// Deep copy; Tensor handles otherwise alias storage.
  CalmModel clone() const;

  /// Parameters the optimizer updates (requires_grad == true).
  std::vector<NamedTensor> parameters() const;
  /// Everything a checkpoint stores: parameters plus the frozen anchor base.
  std::vector<NamedTensor> state() const;

  /// Mean-pooled and adapted video features, [B×D].
  Tensor video_features(Tape& tape, const Tensor& frames, std::size_t frames_per_video) const;
  /// Adapted text features, [B×D].
  Tensor text_features(Tape& tape, const Tensor& text) const;
};

}  // namespace calm
