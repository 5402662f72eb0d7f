#pragma once

#include <string>

#include "calm/anchors.hpp"
#include "calm/cvae.hpp"
#include "calm/model.hpp"

namespace calm {

/// CALM is the generative alignment; KlDiv/CrossEntropy/Mse are the
/// discriminative replacements compared against it; Baseline drops the
/// alignment term entirely.
enum class AlignMode { Calm, KlDiv, CrossEntropy, Mse, Baseline };

std::string to_string(AlignMode mode);
AlignMode align_mode_from_string(const std::string& name);

struct LossConfig {
  double alpha = 0.1;
  AlignMode mode = AlignMode::Calm;
  double task_temperature = 1.0 / 0.07;
  /// Stop gradients through S_p inside the reconstruction term.
  bool block_target_grad = true;
};

/// Symmetric InfoNCE over the batch: mean of the video→text and
/// text→video cross-entropies of temp·cos logits, positives on the
/// diagonal.
Tensor task_loss(Tape& tape, const Tensor& video, const Tensor& text, double temp);

/// Alignment term for `config.mode`. CALM needs the VAE output; the other
/// modes ignore it.
Tensor alignment_loss(Tape& tape, const AnchorDistribution& vp, const AnchorDistribution& sp,
                      const CvaeOutput* cvae, const LossConfig& config);

/// Per-term values for logging; task + rec + weighted_kl + alignment == total.
struct LossReport {
  double task = 0.0;
  double rec = 0.0;
  double kl = 0.0;
  double weighted_kl = 0.0;
  double alignment = 0.0;  // discriminative modes only
  double total = 0.0;

  double sum_of_terms() const { return task + rec + weighted_kl + alignment; }
};

struct TotalLoss {
  Tensor total;
  LossReport report;
  Tensor target;  // detached S_p the reconstruction aimed at (CALM mode only)
};

/// L = L_rec + α·L_KL + L_task in CALM mode; other modes swap the first
/// two terms for their alignment loss (Baseline: none).
/// `fixed_target` replaces S_p as the reconstruction label; with a blocked
/// target this is the function whose derivative backward() computes, which is
/// what finite differences need to hold still.
TotalLoss total_loss(Tape& tape, const Batch& batch, const CalmModel& model,
                     const LossConfig& config, const CvaeNoise& noise,
                     const Tensor& fixed_target = {});

}  // namespace calm
