#include "calm/manifest.hpp"

#include <json.hpp>
#include <set>

#include "calm/error.hpp"
#include "calm/store.hpp"

namespace calm {

using nlohmann::json;

namespace {

const std::set<std::string> kManifestKeys = {
    "format", "version",   "ids",         "video_store",     "text_store", "frames_per_video",
    "labels", "anchor_store", "prompt_template", "split",      "classes"};

}  // namespace

std::string Manifest::to_json_text() const {
  json j;
  j["format"] = "calm-manifest";
  j["version"] = 1;
  j["ids"] = ids;
  j["video_store"] = video_store;
  j["text_store"] = text_store;
  j["frames_per_video"] = frames_per_video;
  if (!anchor_store.empty()) j["anchor_store"] = anchor_store;
  if (!labels.empty()) j["labels"] = labels;
  j["prompt_template"] = prompt_template;
  j["split"] = splits;
  if (!classes.empty()) j["classes"] = classes;
  return j.dump(2) + "\n";
}

Manifest Manifest::from_json_text(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(source + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw FormatError(source + ": manifest must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!kManifestKeys.count(key)) throw FormatError(source + ": unknown manifest key '" + key + "'");

  Manifest m;
  try {
    m.ids = j.at("ids").get<std::vector<std::string>>();
    m.video_store = j.at("video_store").get<std::string>();
    m.text_store = j.at("text_store").get<std::string>();
    m.frames_per_video = j.value("frames_per_video", std::size_t{1});
    m.anchor_store = j.value("anchor_store", std::string{});
    m.labels = j.value("labels", std::vector<std::string>{});
    m.prompt_template = j.value("prompt_template", m.prompt_template);
    m.splits = j.value("split", std::map<std::string, std::vector<std::string>>{});
    m.classes = j.value("classes", std::vector<std::size_t>{});
  } catch (const json::exception& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (m.frames_per_video == 0) throw FormatError(source + ": frames_per_video must be >= 1");
  if (!m.classes.empty() && m.classes.size() != m.ids.size())
    throw FormatError(source + ": classes has " + std::to_string(m.classes.size()) +
                      " entries for " + std::to_string(m.ids.size()) + " ids");
  return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = store::read_file(path);
  return Manifest::from_json_text(std::string(bytes.begin(), bytes.end()), path.string());
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  store::write_text_atomic(path, manifest.to_json_text());
}

std::vector<std::size_t> Corpus::split_indices(const std::string& split) const {
  auto it = manifest.splits.find(split);
  if (it == manifest.splits.end()) throw ContractError("manifest has no split '" + split + "'");
  std::vector<std::size_t> out;
  out.reserve(it->second.size());
  for (const auto& id : it->second) out.push_back(index.at(id));
  return out;
}

Batch Corpus::gather(const std::vector<std::size_t>& indices) const {
  const std::size_t d = dim(), t = manifest.frames_per_video, b = indices.size();
  std::vector<double> f(b * t * d), s(b * d);
  for (std::size_t r = 0; r < b; ++r) {
    const std::size_t i = indices[r];
    std::copy_n(frames.data().begin() + static_cast<std::ptrdiff_t>(i * t * d), t * d,
                f.begin() + static_cast<std::ptrdiff_t>(r * t * d));
    std::copy_n(text.data().begin() + static_cast<std::ptrdiff_t>(i * d), d,
                s.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  return Batch{Tensor({b * t, d}, std::move(f)), Tensor({b, d}, std::move(s)), t};
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
  Corpus c;
  c.manifest = read_manifest(manifest_path);
  c.root = manifest_path.parent_path();
  const auto& m = c.manifest;

  std::vector<std::uint8_t> all;
  auto load = [&](const std::string& rel) {
    const auto path = c.root / rel;
    auto bytes = store::read_file(path);
    Tensor t = store::decode(bytes, path.string());
    all.insert(all.end(), bytes.begin(), bytes.end());
    return t;
  };
  c.frames = load(m.video_store);
  c.text = load(m.text_store);
  if (!m.anchor_store.empty()) c.anchors = load(m.anchor_store);
  c.checksum = sha256_hex(all);

  const std::size_t n = m.ids.size();
  if (c.text.rows() != n)
    throw FormatError(m.text_store + ": " + std::to_string(c.text.rows()) + " rows for " +
                      std::to_string(n) + " ids");
  if (c.frames.rows() != n * m.frames_per_video)
    throw FormatError(m.video_store + ": " + std::to_string(c.frames.rows()) + " rows, expected " +
                      std::to_string(n) + " ids × " + std::to_string(m.frames_per_video) +
                      " frames");
  if (c.frames.cols() != c.text.cols())
    throw FormatError(m.video_store + ": dim " + std::to_string(c.frames.cols()) +
                      " differs from text dim " + std::to_string(c.text.cols()));
  if (c.anchors.defined()) {
    if (c.anchors.rows() != m.labels.size())
      throw FormatError(m.anchor_store + ": " + std::to_string(c.anchors.rows()) + " rows for " +
                        std::to_string(m.labels.size()) + " labels");
    if (c.anchors.cols() != c.text.cols())
      throw FormatError(m.anchor_store + ": dim " + std::to_string(c.anchors.cols()) +
                        " differs from text dim " + std::to_string(c.text.cols()));
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!c.index.emplace(m.ids[i], i).second)
      throw FormatError(manifest_path.string() + ": duplicate id '" + m.ids[i] + "'");
  }
  for (const auto& [name, ids] : m.splits) {
    for (const auto& id : ids)
      if (!c.index.count(id))
        throw FormatError(manifest_path.string() + ": split '" + name + "' references unknown id '" +
                          id + "'");
  }
  return c;
}

}  // namespace calm
