#include "calm/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "calm/error.hpp"
#include "calm/rng.hpp"
#include "calm/store.hpp"

namespace calm {

void SyntheticConfig::validate() const {
  if (n_classes == 0) throw ConfigError("synthetic.n_classes must be >= 1");
  if (samples_per_class == 0) throw ConfigError("synthetic.samples_per_class must be >= 1");
  if (dim == 0) throw ConfigError("synthetic.dim must be >= 1");
  if (frames == 0) throw ConfigError("synthetic.frames must be >= 1");
  if (imbalance_keep < 1 || imbalance_keep > dim)
    throw ConfigError("synthetic.imbalance_keep must satisfy 1 <= imbalance_keep <= dim (got " +
                      std::to_string(imbalance_keep) + ", dim " + std::to_string(dim) + ")");
  if (!(video_noise >= 0.0)) throw ConfigError("synthetic.video_noise must be >= 0");
  if (!(text_noise >= 0.0)) throw ConfigError("synthetic.text_noise must be >= 0");
  if (!(instance_spread >= 0.0)) throw ConfigError("synthetic.instance_spread must be >= 0");
  if (n_anchors == 0) throw ConfigError("synthetic.n_anchors must be >= 1");
  if (!(val_fraction >= 0.0 && test_fraction >= 0.0 && val_fraction + test_fraction < 1.0))
    throw ConfigError("synthetic.val_fraction + test_fraction must be in [0, 1)");
}

namespace {

std::string sample_id(std::size_t cls, std::size_t s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "c%03zu_s%04zu", cls, s);
  return buf;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t d = cfg.dim, t = cfg.frames, n = cfg.n_classes * cfg.samples_per_class;
  Rng rng(seed, "synthetic");

  std::vector<double> centers(cfg.n_classes * d);
  for (auto& v : centers) v = rng.normal();

  const auto per_class = static_cast<double>(cfg.samples_per_class);
  const auto n_val = static_cast<std::size_t>(std::lround(per_class * cfg.val_fraction));
  const auto n_test = static_cast<std::size_t>(std::lround(per_class * cfg.test_fraction));
  if (n_val + n_test >= cfg.samples_per_class)
    throw ConfigError("synthetic: val/test fractions leave no training samples per class");

  SyntheticData out;
  std::vector<double> frames(n * t * d), text(n * d), content(d);
  auto& m = out.manifest;
  m.frames_per_video = t;
  std::size_t row = 0;
  for (std::size_t c = 0; c < cfg.n_classes; ++c) {
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s, ++row) {
      for (std::size_t j = 0; j < d; ++j)
        content[j] = centers[c * d + j] + cfg.instance_spread * rng.normal();
      for (std::size_t f = 0; f < t; ++f)
        for (std::size_t j = 0; j < d; ++j)
          frames[(row * t + f) * d + j] = content[j] + cfg.video_noise * rng.normal();
      for (std::size_t j = 0; j < d; ++j) {
        const double kept = j < cfg.imbalance_keep ? content[j] : 0.0;
        text[row * d + j] = kept + cfg.text_noise * rng.normal();
      }
      const std::string id = sample_id(c, s);
      m.ids.push_back(id);
      m.classes.push_back(c);
      const char* split = s < cfg.samples_per_class - n_val - n_test ? "train"
                          : s < cfg.samples_per_class - n_test       ? "val"
                                                                     : "test";
      m.splits[split].push_back(id);
    }
  }

  Rng anchor_rng(seed, "anchors");
  std::vector<double> anchors(cfg.n_anchors * d);
  for (auto& v : anchors) v = anchor_rng.normal();
  for (std::size_t k = 0; k < cfg.n_anchors; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "anchor_%03zu", k);
    m.labels.emplace_back(buf);
  }

  // Values are rounded to float32 here so in-memory data equals what a
  // reload from disk yields.
  auto narrow = [](std::vector<double>& v) {
    for (auto& x : v) x = static_cast<double>(static_cast<float>(x));
  };
  narrow(frames);
  narrow(text);
  narrow(anchors);
  out.frames = Tensor({n * t, d}, std::move(frames));
  out.text = Tensor({n, d}, std::move(text));
  out.anchors = Tensor({cfg.n_anchors, d}, std::move(anchors));
  m.video_store = "video.calm";
  m.text_store = "text.calm";
  m.anchor_store = "anchors.calm";
  return out;
}

std::map<std::string, std::string> write_synthetic(const SyntheticData& data,
                                                   const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const auto& m = data.manifest;
  store::write_store(dir / m.video_store, data.frames);
  store::write_store(dir / m.text_store, data.text);
  store::write_store(dir / m.anchor_store, data.anchors);
  write_manifest(dir / "manifest.json", m);

  std::map<std::string, std::string> sums;
  for (const auto& name : {m.video_store, m.text_store, m.anchor_store, std::string("manifest.json")})
    sums[name] = sha256_file(dir / name);
  return sums;
}

}  // namespace calm
