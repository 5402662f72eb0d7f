#pragma once

#include <string>
#include <vector>

#include "calm/anchors.hpp"
#include "calm/gradcheck.hpp"
#include "calm/rng.hpp"
#include "calm/tensor.hpp"

namespace calm {

enum class Activation { Tanh, Relu };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

/// Fully connected layer y = x·W + b with W stored [in×out].
struct Linear {
  Tensor weight;
  Tensor bias;  // [1×out]

  /// Uniform fan-in init, U(-1/√in, 1/√in) for weights, zero bias.
  static Linear init(std::size_t in, std::size_t out, Rng& rng);
  static Linear zeros(std::size_t in, std::size_t out);
  Tensor apply(Tape& tape, const Tensor& x) const;
};

struct CvaeShape {
  std::size_t anchors = 0;   // K
  std::size_t hidden = 128;  // H
  std::size_t latent = 256;  // d
  Activation activation = Activation::Tanh;
  double dropout = 0.1;
};

/// Encoder K→H→(μ, log σ²) ∈ ℝ^d and decoder d→H→K.
struct CvaeParams {
  CvaeShape shape;
  Linear enc_hidden;
  Linear enc_mu;
  Linear enc_logvar;
  Linear dec_hidden;
  Linear dec_out;

  static CvaeParams init(const CvaeShape& shape, Rng& rng);
  static CvaeParams zeros(const CvaeShape& shape);
  std::vector<NamedTensor> parameters() const;
};

/// Everything random in one forward pass, sampled up front so a pass can
/// be replayed exactly. Masks are undefined tensors when dropout is off.
struct CvaeNoise {
  Tensor eps;       // [B×d]
  Tensor enc_mask;  // [B×H]
  Tensor dec_mask;  // [B×H]
};

CvaeNoise sample_noise(const CvaeShape& shape, std::size_t batch, Rng& eps_rng, Rng& dropout_rng,
                       bool training);

struct Posterior {
  Tensor mu;      // [B×d]
  Tensor logvar;  // [B×d], log σ²
};

struct LatentSample {
  Tensor mu;
  Tensor logvar;
  Tensor eps;
  Tensor z;  // mu + exp(0.5·logvar) ⊙ eps
};

struct Reconstruction {
  Tensor probs;  // [B×K]
};

Posterior encode(Tape& tape, const AnchorDistribution& vp, const CvaeParams& params,
                 const Tensor& dropout_mask = {});

LatentSample reparameterize(Tape& tape, const Tensor& mu, const Tensor& logvar, const Tensor& eps);
/// Draws ε ~ N(0, I) from `rng`.
LatentSample reparameterize(Tape& tape, const Tensor& mu, const Tensor& logvar, Rng& rng);

Reconstruction decode(Tape& tape, const Tensor& z, const CvaeParams& params,
                      const Tensor& dropout_mask = {});

/// Batch mean of -Σ_k target_k · log max(recon_k, 1e-12).
Tensor rec_loss(Tape& tape, const AnchorDistribution& target, const Reconstruction& recon);

/// Batch mean of ½ Σ_i (μ_i² + σ_i² − log σ_i² − 1), the KL to N(0, I).
Tensor kl_loss(Tape& tape, const Tensor& mu, const Tensor& logvar);

/// Batch-mean Shannon entropy of probability rows (same floor as the losses).
double entropy(const Tensor& probs);

struct CvaeOptions {
  /// Treat S_p as a fixed label in the reconstruction term.
  bool block_target_grad = true;
};

struct CvaeOutput {
  Tensor rec;
  Tensor kl;
  Reconstruction recon;
  LatentSample latent;
};

/// encode → reparameterize → decode → (rec, kl).
CvaeOutput cvae_forward(Tape& tape, const AnchorDistribution& vp, const AnchorDistribution& sp,
                        const CvaeParams& params, const CvaeNoise& noise,
                        const CvaeOptions& options = {});

}  // namespace calm
