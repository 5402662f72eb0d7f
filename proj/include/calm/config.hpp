#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "calm/model.hpp"
#include "calm/objective.hpp"
#include "calm/optim.hpp"
#include "calm/synthetic.hpp"

namespace calm {

/// Sizes of the randomized problem `gradcheck` differentiates.
struct GradcheckConfig {
  std::size_t batch_size = 4;
  std::size_t anchors = 5;
  std::size_t feature_dim = 6;
  std::size_t frames = 3;
  double step = 1e-5;
  double tolerance = 1e-4;
};

/// Everything a command needs. Unknown keys are rejected; serializing
/// writes every field, so the output is a complete, replayable config.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/calm";
  std::string manifest;  // data.manifest
  SyntheticConfig synthetic;
  ModelConfig model;
  LossConfig loss;
  OptimConfig optim;
  GradcheckConfig gradcheck;

  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace calm
