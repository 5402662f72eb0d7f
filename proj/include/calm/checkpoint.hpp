#pragma once

// Checkpoint file:
//   "CALMCKPT"            8 bytes
//   version               u32 LE (= 1)
//   metadata length       u64 LE
//   metadata              UTF-8 JSON (config, step, metric history, tensor list)
//   tensor blocks         one store block per entry of metadata["tensors"],
//                         dtype 1 (float64), in that order

#include <filesystem>
#include <json.hpp>

#include "calm/config.hpp"
#include "calm/model.hpp"

namespace calm {

struct Checkpoint {
  nlohmann::ordered_json metadata;
  std::vector<NamedTensor> tensors;
};

std::vector<std::uint8_t> encode_checkpoint(const CalmModel& model,
                                            nlohmann::ordered_json metadata);
void write_checkpoint(const std::filesystem::path& path, const CalmModel& model,
                      nlohmann::ordered_json metadata);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Rebuilds the model a checkpoint describes. metadata must hold "config"
/// and "labels".
CalmModel model_from_checkpoint(const Checkpoint& checkpoint);

}  // namespace calm
