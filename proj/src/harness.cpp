#include "calm/harness.hpp"

#include <cstdio>
#include <sstream>

#include "calm/error.hpp"
#include "calm/trainer.hpp"

namespace calm {

using nlohmann::ordered_json;

GradcheckReport model_gradcheck(const RunConfig& config) {
  const auto& g = config.gradcheck;
  Rng rng(config.seed, "gradcheck");
  auto random = [&rng](Shape shape, double scale, bool requires_grad) {
    std::vector<double> v(shape_size(shape));
    for (auto& x : v) x = scale * rng.normal();
    return Tensor(std::move(shape), std::move(v), requires_grad);
  };

  std::vector<std::string> labels;
  for (std::size_t k = 0; k < g.anchors; ++k) labels.push_back("anchor_" + std::to_string(k));
  Tensor base = random({g.anchors, g.feature_dim}, 1.0, false);
  Rng init_rng(config.seed, "init");
  CalmModel model = CalmModel::init(config.model, AnchorSet(base, labels), init_rng);

  // Move off the identity/zero initialisation so no term sits at a special point.
  for (auto& p : model.parameters()) {
    Tensor t = p.tensor;
    for (auto& v : t.mutable_data()) v += 0.1 * rng.normal();
  }

  Batch batch{random({g.batch_size * g.frames, g.feature_dim}, 1.0, true),
              random({g.batch_size, g.feature_dim}, 1.0, true), g.frames};
  Rng eps_rng(config.seed, "eps");
  Rng dropout_rng(config.seed, "dropout");
  const CvaeNoise noise = sample_noise(model.cvae.shape, g.batch_size, eps_rng, dropout_rng, true);

  auto params = model.parameters();
  params.push_back({"input.frames", batch.frames});
  params.push_back({"input.text", batch.text});

  // The blocked target is a stop-gradient: hold S_p at its unperturbed value
  // so the finite differences see the same function backward() differentiates.
  Tensor target;
  if (config.loss.mode == AlignMode::Calm && config.loss.block_target_grad) {
    Tape probe;
    target = total_loss(probe, batch, model, config.loss, noise).target;
  }
  ScalarFn f = [&](Tape& tape) {
    return total_loss(tape, batch, model, config.loss, noise, target).total;
  };
  return finite_diff_check(f, params, g.step);
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const Corpus& corpus,
                                      bool write_outputs) {
  std::vector<AblationRow> rows;
  for (AlignMode mode : kAblationModes) {
    RunConfig run = config;
    run.loss.mode = mode;
    run.output_dir = (std::filesystem::path(config.output_dir) / "ablation" / to_string(mode)).string();
    TrainOptions opts;
    opts.write_outputs = write_outputs;
    opts.notes.push_back("ablation run, mode " + to_string(mode));
    TrainResult result = train(run, corpus, opts);
    AblationRow row;
    row.mode = mode;
    row.test = evaluate(result.best_model, corpus, "test");
    const auto& last = result.evaluations.back();
    row.final_train_loss = last.train_mean.total;
    row.best_epoch = result.best_epoch;
    row.data_checksum = result.data_checksum;
    rows.push_back(row);
  }
  return rows;
}

ordered_json ablation_json(const std::vector<AblationRow>& rows, const RunConfig& config) {
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    table.push_back({{"mode", to_string(r.mode)},
                     {"r1", r.test.r1},
                     {"r5", r.test.r5},
                     {"r10", r.test.r10},
                     {"mnr", r.test.mnr},
                     {"n_queries", r.test.n_queries},
                     {"final_train_loss", r.final_train_loss},
                     {"best_epoch", r.best_epoch},
                     {"data_checksum", r.data_checksum}});
  }
  ordered_json j;
  j["type"] = "ablation";
  j["split"] = "test";
  j["seed"] = config.seed;
  j["alignment_weighting"] = "discriminative losses unweighted; CALM uses rec + alpha*KL";
  j["rows"] = std::move(table);
  return j;
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-15s %8s %8s %8s %8s %12s\n", "Loss", "R@1", "R@5", "R@10",
                "MnR", "train_loss");
  os << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-15s %8.2f %8.2f %8.2f %8.2f %12.5f\n",
                  to_string(r.mode).c_str(), r.test.r1, r.test.r5, r.test.r10, r.test.mnr,
                  r.final_train_loss);
    os << line;
  }
  return os.str();
}

}  // namespace calm
