#include "calm/model.hpp"

#include <algorithm>

#include "calm/error.hpp"
#include "calm/ops.hpp"

namespace calm {

namespace {

Linear identity_adapter(std::size_t dim) {
  std::vector<double> w(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) w[i * dim + i] = 1.0;
  return {Tensor({dim, dim}, std::move(w), true), Tensor::zeros({1, dim}, true)};
}

}  // namespace

CalmModel CalmModel::init(const ModelConfig& config, AnchorSet anchors, Rng& init_rng) {
  const std::size_t dim = anchors.dim();
  CvaeShape shape{anchors.size(), config.hidden_dim, config.latent_dim, config.activation,
                  config.dropout};
  CvaeParams cvae = CvaeParams::init(shape, init_rng);
  return CalmModel{config,
                   std::move(anchors),
                   Temperature(config.temperature, config.learn_temperature),
                   identity_adapter(dim),
                   identity_adapter(dim),
                   std::move(cvae)};
}

CalmModel CalmModel::clone() const {
  Rng unused(0, "init");
  CalmModel copy = init(config, AnchorSet(anchors.base(), anchors.labels(), anchors.prompt_template()),
                        unused);
  const auto src = parameters();
  auto dst = copy.parameters();
  for (std::size_t i = 0; i < src.size(); ++i)
    std::copy(src[i].tensor.data().begin(), src[i].tensor.data().end(),
              dst[i].tensor.mutable_data().begin());
  return copy;
}

std::vector<NamedTensor> CalmModel::parameters() const {
  std::vector<NamedTensor> out{
      {"video_adapter.weight", video_adapter.weight},
      {"video_adapter.bias", video_adapter.bias},
      {"text_adapter.weight", text_adapter.weight},
      {"text_adapter.bias", text_adapter.bias},
      {"anchors.positional", anchors.positional()},
  };
  if (temperature.learnable()) out.push_back({"temperature.log_tau", temperature.log_tau()});
  for (auto& p : cvae.parameters()) out.push_back(std::move(p));
  return out;
}

std::vector<NamedTensor> CalmModel::state() const {
  auto out = parameters();
  out.insert(out.begin(), NamedTensor{"anchors.base", anchors.base()});
  return out;
}

Tensor CalmModel::video_features(Tape& tape, const Tensor& frames,
                                 std::size_t frames_per_video) const {
  if (frames.cols() != anchors.dim()) {
    throw DimensionError("video features have dim " + std::to_string(frames.cols()) +
                         ", anchors have " + std::to_string(anchors.dim()));
  }
  Tensor fused = ops::group_mean_rows(tape, frames, frames_per_video);
  return video_adapter.apply(tape, fused);
}

Tensor CalmModel::text_features(Tape& tape, const Tensor& text) const {
  if (text.cols() != anchors.dim()) {
    throw DimensionError("text features have dim " + std::to_string(text.cols()) +
                         ", anchors have " + std::to_string(anchors.dim()));
  }
  return text_adapter.apply(tape, text);
}

}  // namespace calm
