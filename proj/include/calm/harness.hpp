#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "calm/config.hpp"
#include "calm/gradcheck.hpp"
#include "calm/manifest.hpp"
#include "calm/retrieval.hpp"

namespace calm {

/// Finite-difference check of the full training loss in `config.loss.mode`
/// on a random problem sized by `config.gradcheck` and `config.model`.
/// Covers every trainable parameter plus the raw frame and text inputs;
/// dropout masks and ε are sampled once and replayed.
GradcheckReport model_gradcheck(const RunConfig& config);

struct AblationRow {
  AlignMode mode = AlignMode::Baseline;
  RetrievalMetrics test;
  double final_train_loss = 0.0;
  std::size_t best_epoch = 0;
  std::string data_checksum;
};

/// Modes in comparison-table order.
inline const std::vector<AlignMode> kAblationModes = {
    AlignMode::Baseline, AlignMode::KlDiv, AlignMode::CrossEntropy, AlignMode::Mse,
    AlignMode::Calm};

/// Trains one model per mode with the shared seed and scores each
/// best-by-val model on the test split. With write_outputs, each run goes
/// to <output_dir>/ablation/<MODE>/.
std::vector<AblationRow> run_ablation(const RunConfig& config, const Corpus& corpus,
                                      bool write_outputs);

nlohmann::ordered_json ablation_json(const std::vector<AblationRow>& rows,
                                     const RunConfig& config);
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace calm
