#include "calm/cvae.hpp"

#include <cmath>

#include "calm/error.hpp"
#include "calm/ops.hpp"

namespace calm {

namespace {

Tensor activate(Tape& tape, const Tensor& x, Activation a) {
  return a == Activation::Relu ? ops::relu(tape, x) : ops::tanh(tape, x);
}

void require_finite(const char* what, const Tensor& t) {
  for (double v : t.data())
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite activation");
}

Tensor maybe_dropout(Tape& tape, const Tensor& x, const Tensor& mask) {
  return mask.defined() ? ops::dropout(tape, x, mask) : x;
}

}  // namespace

std::string to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + name + "' (expected tanh or relu)");
}

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::vector<double> w(in * out);
  for (auto& v : w) v = rng.uniform(-bound, bound);
  return {Tensor({in, out}, std::move(w), true), Tensor::zeros({1, out}, true)};
}

Linear Linear::zeros(std::size_t in, std::size_t out) {
  return {Tensor::zeros({in, out}, true), Tensor::zeros({1, out}, true)};
}

Tensor Linear::apply(Tape& tape, const Tensor& x) const {
  return ops::add_row_bias(tape, ops::matmul(tape, x, weight), bias);
}

CvaeParams CvaeParams::init(const CvaeShape& s, Rng& rng) {
  if (s.anchors == 0 || s.hidden == 0 || s.latent == 0)
    throw ConfigError("cvae sizes must be positive");
  CvaeParams p;
  p.shape = s;
  p.enc_hidden = Linear::init(s.anchors, s.hidden, rng);
  p.enc_mu = Linear::init(s.hidden, s.latent, rng);
  p.enc_logvar = Linear::init(s.hidden, s.latent, rng);
  p.dec_hidden = Linear::init(s.latent, s.hidden, rng);
  p.dec_out = Linear::init(s.hidden, s.anchors, rng);
  return p;
}

CvaeParams CvaeParams::zeros(const CvaeShape& s) {
  CvaeParams p;
  p.shape = s;
  p.enc_hidden = Linear::zeros(s.anchors, s.hidden);
  p.enc_mu = Linear::zeros(s.hidden, s.latent);
  p.enc_logvar = Linear::zeros(s.hidden, s.latent);
  p.dec_hidden = Linear::zeros(s.latent, s.hidden);
  p.dec_out = Linear::zeros(s.hidden, s.anchors);
  return p;
}

std::vector<NamedTensor> CvaeParams::parameters() const {
  return {
      {"cvae.enc_hidden.weight", enc_hidden.weight}, {"cvae.enc_hidden.bias", enc_hidden.bias},
      {"cvae.enc_mu.weight", enc_mu.weight},         {"cvae.enc_mu.bias", enc_mu.bias},
      {"cvae.enc_logvar.weight", enc_logvar.weight}, {"cvae.enc_logvar.bias", enc_logvar.bias},
      {"cvae.dec_hidden.weight", dec_hidden.weight}, {"cvae.dec_hidden.bias", dec_hidden.bias},
      {"cvae.dec_out.weight", dec_out.weight},       {"cvae.dec_out.bias", dec_out.bias},
  };
}

CvaeNoise sample_noise(const CvaeShape& shape, std::size_t batch, Rng& eps_rng, Rng& dropout_rng,
                       bool training) {
  CvaeNoise noise;
  std::vector<double> eps(batch * shape.latent);
  for (auto& v : eps) v = eps_rng.normal();
  noise.eps = Tensor({batch, shape.latent}, std::move(eps));
  if (training && shape.dropout > 0.0) {
    noise.enc_mask = ops::make_dropout_mask({batch, shape.hidden}, shape.dropout, dropout_rng);
    noise.dec_mask = ops::make_dropout_mask({batch, shape.hidden}, shape.dropout, dropout_rng);
  }
  return noise;
}

Posterior encode(Tape& tape, const AnchorDistribution& vp, const CvaeParams& params,
                 const Tensor& dropout_mask) {
  if (vp.probs.cols() != params.shape.anchors) {
    throw DimensionError("encode: distribution has " + std::to_string(vp.probs.cols()) +
                         " anchors, encoder expects " + std::to_string(params.shape.anchors));
  }
  Tensor h = activate(tape, params.enc_hidden.apply(tape, vp.probs), params.shape.activation);
  h = maybe_dropout(tape, h, dropout_mask);
  Posterior post{params.enc_mu.apply(tape, h), params.enc_logvar.apply(tape, h)};
  require_finite("encode", post.mu);
  require_finite("encode", post.logvar);
  return post;
}

LatentSample reparameterize(Tape& tape, const Tensor& mu, const Tensor& logvar,
                            const Tensor& eps) {
  if (mu.shape() != logvar.shape() || mu.shape() != eps.shape()) {
    throw DimensionError("reparameterize: shapes " + shape_string(mu.shape()) + ", " +
                         shape_string(logvar.shape()) + ", " + shape_string(eps.shape()));
  }
  Tensor sigma = ops::exp(tape, ops::scale(tape, logvar, 0.5));
  Tensor z = ops::add(tape, mu, ops::mul(tape, sigma, eps));
  return {mu, logvar, eps, z};
}

LatentSample reparameterize(Tape& tape, const Tensor& mu, const Tensor& logvar, Rng& rng) {
  std::vector<double> eps(mu.size());
  for (auto& v : eps) v = rng.normal();
  return reparameterize(tape, mu, logvar, Tensor(mu.shape(), std::move(eps)));
}

Reconstruction decode(Tape& tape, const Tensor& z, const CvaeParams& params,
                      const Tensor& dropout_mask) {
  if (z.cols() != params.shape.latent) {
    throw DimensionError("decode: latent has " + std::to_string(z.cols()) +
                         " dims, decoder expects " + std::to_string(params.shape.latent));
  }
  Tensor h = activate(tape, params.dec_hidden.apply(tape, z), params.shape.activation);
  h = maybe_dropout(tape, h, dropout_mask);
  Tensor logits = params.dec_out.apply(tape, h);
  require_finite("decode", logits);
  return {ops::softmax_rows(tape, logits)};
}

Tensor rec_loss(Tape& tape, const AnchorDistribution& target, const Reconstruction& recon) {
  if (target.probs.shape() != recon.probs.shape()) {
    throw DimensionError("rec_loss: target " + shape_string(target.probs.shape()) +
                         " vs reconstruction " + shape_string(recon.probs.shape()));
  }
  const double batch = static_cast<double>(target.probs.rows());
  Tensor log_recon = ops::log(tape, ops::clamp_min(tape, recon.probs, ops::kProbFloor));
  return ops::scale(tape, ops::sum(tape, ops::mul(tape, target.probs, log_recon)), -1.0 / batch);
}

Tensor kl_loss(Tape& tape, const Tensor& mu, const Tensor& logvar) {
  if (mu.shape() != logvar.shape()) {
    throw DimensionError("kl_loss: mu " + shape_string(mu.shape()) + " vs logvar " +
                         shape_string(logvar.shape()));
  }
  const double batch = static_cast<double>(mu.rows());
  Tensor total = ops::add(tape, ops::sum(tape, ops::square(tape, mu)),
                          ops::sum(tape, ops::exp(tape, logvar)));
  total = ops::sub(tape, total, ops::sum(tape, logvar));
  total = ops::add_scalar(tape, total, -static_cast<double>(mu.size()));
  return ops::scale(tape, total, 0.5 / batch);
}

double entropy(const Tensor& probs) {
  const std::size_t m = probs.rows(), k = probs.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double p = probs[i * k + j];
      row += p * std::log(p > ops::kProbFloor ? p : ops::kProbFloor);
    }
    total += row;
  }
  return -total / static_cast<double>(m);
}

CvaeOutput cvae_forward(Tape& tape, const AnchorDistribution& vp, const AnchorDistribution& sp,
                        const CvaeParams& params, const CvaeNoise& noise,
                        const CvaeOptions& options) {
  if (vp.probs.shape() != sp.probs.shape()) {
    throw DimensionError("cvae_forward: V_p " + shape_string(vp.probs.shape()) + " vs S_p " +
                         shape_string(sp.probs.shape()));
  }
  Posterior post = encode(tape, vp, params, noise.enc_mask);
  LatentSample latent = reparameterize(tape, post.mu, post.logvar, noise.eps);
  Reconstruction recon = decode(tape, latent.z, params, noise.dec_mask);
  AnchorDistribution target = sp;
  if (options.block_target_grad) target.probs = sp.probs.detach();
  Tensor rec = rec_loss(tape, target, recon);
  Tensor kl = kl_loss(tape, post.mu, post.logvar);
  return {rec, kl, recon, latent};
}

}  // namespace calm
