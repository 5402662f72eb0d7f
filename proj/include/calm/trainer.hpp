#pragma once

#include <json.hpp>
#include <ostream>
#include <string>
#include <vector>

#include "calm/config.hpp"
#include "calm/manifest.hpp"
#include "calm/model.hpp"
#include "calm/objective.hpp"
#include "calm/retrieval.hpp"

namespace calm {

struct EvalRecord {
  std::size_t epoch = 0;  // 0 is the pre-training evaluation
  std::size_t step = 0;
  std::size_t train_batches = 0;
  LossReport train_mean;  // mean over this epoch's batches
  RetrievalMetrics val;
};

struct TrainOptions {
  /// Write run_header.json, metrics.jsonl and checkpoints to output_dir.
  bool write_outputs = true;
  /// Extra lines recorded in the run header (e.g. seed overrides).
  std::vector<std::string> notes;
  /// Progress lines; null for silence.
  std::ostream* progress = nullptr;
};

struct TrainResult {
  std::vector<LossReport> step_losses;
  std::vector<EvalRecord> evaluations;
  std::size_t best_epoch = 0;
  RetrievalMetrics best_val;
  CalmModel final_model;
  CalmModel best_model;
  std::string data_checksum;
};

/// Builds a freshly initialised model for a corpus (anchors from the
/// corpus, init substream of `config.seed`).
CalmModel build_model(const RunConfig& config, const Corpus& corpus);

/// Text→video retrieval metrics on one split.
RetrievalMetrics evaluate(const CalmModel& model, const Corpus& corpus, const std::string& split);

/// Header record: resolved config, data checksum, deviations from the
/// full-scale reference setup.
nlohmann::ordered_json run_header(const RunConfig& config, const Corpus& corpus,
                                  const std::vector<std::string>& notes);

/// Seeded AdamW loop. Shuffles the train split each epoch, evaluates the
/// val split before training and after every epoch, keeps the best-by-R@1
/// model. epochs == 0 runs the evaluation only. A non-finite loss throws
/// NumericError after the last good checkpoint has been written.
TrainResult train(const RunConfig& config, const Corpus& corpus, const TrainOptions& options = {});

}  // namespace calm
