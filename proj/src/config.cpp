#include "calm/config.hpp"

#include <set>

#include "calm/error.hpp"
#include "calm/store.hpp"

namespace calm {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

void reject_unknown(const json& obj, const std::string& section,
                    const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError("'" + section + "' must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("unknown config key '" + (section.empty() ? key : section + "." + key) +
                        "'");
    }
  }
}

template <typename T>
void read(const json& obj, const std::string& section, const char* key, T& dst) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    dst = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

}  // namespace

void RunConfig::validate() const {
  synthetic.validate();
  optim.validate();
  if (model.latent_dim == 0) throw ConfigError("model.latent_dim must be >= 1");
  if (model.hidden_dim == 0) throw ConfigError("model.hidden_dim must be >= 1");
  if (!(model.dropout >= 0.0 && model.dropout < 1.0))
    throw ConfigError("model.dropout must be in [0, 1)");
  if (!(model.temperature > 0.0)) throw ConfigError("model.temperature must be > 0");
  if (!(loss.alpha >= 0.0)) throw ConfigError("loss.alpha must be >= 0");
  if (!(loss.task_temperature > 0.0)) throw ConfigError("loss.task_temperature must be > 0");
  if (gradcheck.batch_size == 0 || gradcheck.anchors == 0 || gradcheck.feature_dim == 0 ||
      gradcheck.frames == 0)
    throw ConfigError("gradcheck sizes must be >= 1");
  if (!(gradcheck.step > 0.0)) throw ConfigError("gradcheck.step must be > 0");
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["data"] = {{"manifest", c.manifest}};
  const auto& s = c.synthetic;
  j["synthetic"] = {{"n_classes", s.n_classes},
                    {"samples_per_class", s.samples_per_class},
                    {"dim", s.dim},
                    {"frames", s.frames},
                    {"video_noise", s.video_noise},
                    {"text_noise", s.text_noise},
                    {"imbalance_keep", s.imbalance_keep},
                    {"instance_spread", s.instance_spread},
                    {"n_anchors", s.n_anchors},
                    {"val_fraction", s.val_fraction},
                    {"test_fraction", s.test_fraction}};
  const auto& m = c.model;
  j["model"] = {{"latent_dim", m.latent_dim},
                {"hidden_dim", m.hidden_dim},
                {"activation", to_string(m.activation)},
                {"dropout", m.dropout},
                {"temperature", m.temperature},
                {"learn_temperature", m.learn_temperature}};
  const auto& l = c.loss;
  j["loss"] = {{"mode", to_string(l.mode)},
               {"alpha", l.alpha},
               {"task_temperature", l.task_temperature},
               {"block_target_grad", l.block_target_grad}};
  const auto& o = c.optim;
  j["optim"] = {{"lr", o.lr},
                {"beta1", o.beta1},
                {"beta2", o.beta2},
                {"eps", o.eps},
                {"weight_decay", o.weight_decay},
                {"batch_size", o.batch_size},
                {"epochs", o.epochs},
                {"max_steps", o.max_steps}};
  const auto& g = c.gradcheck;
  j["gradcheck"] = {{"batch_size", g.batch_size}, {"anchors", g.anchors},
                    {"feature_dim", g.feature_dim}, {"frames", g.frames},
                    {"step", g.step},             {"tolerance", g.tolerance}};
  return j;
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j, "", {"seed", "output_dir", "data", "synthetic", "model", "loss", "optim",
                         "gradcheck"});
  RunConfig c;
  read(j, "", "seed", c.seed);
  read(j, "", "output_dir", c.output_dir);

  if (auto it = j.find("data"); it != j.end()) {
    reject_unknown(*it, "data", {"manifest"});
    read(*it, "data", "manifest", c.manifest);
  }
  if (auto it = j.find("synthetic"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "synthetic",
                   {"n_classes", "samples_per_class", "dim", "frames", "video_noise", "text_noise",
                    "imbalance_keep", "instance_spread", "n_anchors", "val_fraction",
                    "test_fraction"});
    auto& d = c.synthetic;
    read(s, "synthetic", "n_classes", d.n_classes);
    read(s, "synthetic", "samples_per_class", d.samples_per_class);
    read(s, "synthetic", "dim", d.dim);
    read(s, "synthetic", "frames", d.frames);
    read(s, "synthetic", "video_noise", d.video_noise);
    read(s, "synthetic", "text_noise", d.text_noise);
    read(s, "synthetic", "imbalance_keep", d.imbalance_keep);
    read(s, "synthetic", "instance_spread", d.instance_spread);
    read(s, "synthetic", "n_anchors", d.n_anchors);
    read(s, "synthetic", "val_fraction", d.val_fraction);
    read(s, "synthetic", "test_fraction", d.test_fraction);
  }
  if (auto it = j.find("model"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "model", {"latent_dim", "hidden_dim", "activation", "dropout", "temperature",
                                "learn_temperature"});
    auto& d = c.model;
    read(s, "model", "latent_dim", d.latent_dim);
    read(s, "model", "hidden_dim", d.hidden_dim);
    std::string act = to_string(d.activation);
    read(s, "model", "activation", act);
    d.activation = activation_from_string(act);
    read(s, "model", "dropout", d.dropout);
    read(s, "model", "temperature", d.temperature);
    read(s, "model", "learn_temperature", d.learn_temperature);
  }
  if (auto it = j.find("loss"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "loss", {"mode", "alpha", "task_temperature", "block_target_grad"});
    auto& d = c.loss;
    std::string mode = to_string(d.mode);
    read(s, "loss", "mode", mode);
    d.mode = align_mode_from_string(mode);
    read(s, "loss", "alpha", d.alpha);
    read(s, "loss", "task_temperature", d.task_temperature);
    read(s, "loss", "block_target_grad", d.block_target_grad);
  }
  if (auto it = j.find("optim"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "optim", {"lr", "beta1", "beta2", "eps", "weight_decay", "batch_size",
                                "epochs", "max_steps"});
    auto& d = c.optim;
    read(s, "optim", "lr", d.lr);
    read(s, "optim", "beta1", d.beta1);
    read(s, "optim", "beta2", d.beta2);
    read(s, "optim", "eps", d.eps);
    read(s, "optim", "weight_decay", d.weight_decay);
    read(s, "optim", "batch_size", d.batch_size);
    read(s, "optim", "epochs", d.epochs);
    read(s, "optim", "max_steps", d.max_steps);
  }
  if (auto it = j.find("gradcheck"); it != j.end()) {
    const json& s = *it;
    reject_unknown(s, "gradcheck",
                   {"batch_size", "anchors", "feature_dim", "frames", "step", "tolerance"});
    auto& d = c.gradcheck;
    read(s, "gradcheck", "batch_size", d.batch_size);
    read(s, "gradcheck", "anchors", d.anchors);
    read(s, "gradcheck", "feature_dim", d.feature_dim);
    read(s, "gradcheck", "frames", d.frames);
    read(s, "gradcheck", "step", d.step);
    read(s, "gradcheck", "tolerance", d.tolerance);
  }
  c.optim.seed = c.seed;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const auto bytes = store::read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace calm
