#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "calm/manifest.hpp"

namespace calm {

/// Paired video/text embeddings with an information imbalance: videos see
/// the full content vector, text only its first `imbalance_keep` axes.
///
/// For sample i of class c:
///   x_i     = μ_c + instance_spread · ξ_i,     μ_c, ξ_i ~ N(0, I_D)
///   frame_t = x_i + N(0, σ_v² I)               t = 1..T
///   text    = Π_m(x_i) + N(0, σ_s² I)
/// instance_spread = 0 reduces to pure class centers.
struct SyntheticConfig {
  std::size_t n_classes = 8;
  std::size_t samples_per_class = 32;
  std::size_t dim = 16;
  std::size_t frames = 4;
  double video_noise = 0.2;
  double text_noise = 0.2;
  std::size_t imbalance_keep = 4;
  double instance_spread = 0.5;
  std::size_t n_anchors = 16;
  double val_fraction = 0.125;
  double test_fraction = 0.125;

  void validate() const;
};

struct SyntheticData {
  Tensor frames;   // [N·T×D]
  Tensor text;     // [N×D]
  Tensor anchors;  // [K×D]
  Manifest manifest;
};

SyntheticData generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

/// Writes video/text/anchor stores and manifest.json into `dir` and returns
/// file name → SHA-256.
std::map<std::string, std::string> write_synthetic(const SyntheticData& data,
                                                   const std::filesystem::path& dir);

}  // namespace calm
