#include "calm/checkpoint.hpp"

#include <cstring>

#include "calm/error.hpp"
#include "calm/store.hpp"

namespace calm {

using nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'C', 'A', 'L', 'M', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const CalmModel& model, ordered_json metadata) {
  const auto state = model.state();
  ordered_json list = ordered_json::array();
  for (const auto& t : state)
    list.push_back({{"name", t.name}, {"shape", {t.tensor.rows(), t.tensor.cols()}}});
  metadata["labels"] = model.anchors.labels();
  metadata["prompt_template"] = model.anchors.prompt_template();
  metadata["tensors"] = std::move(list);
  const std::string meta = metadata.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + 8);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(kCheckpointVersion >> (8 * i)));
  const std::uint64_t len = meta.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  out.insert(out.end(), meta.begin(), meta.end());
  for (const auto& t : state) {
    const Tensor as_matrix({t.tensor.rows(), t.tensor.cols()},
                           std::vector<double>(t.tensor.data().begin(), t.tensor.data().end()));
    const auto block = store::encode(as_matrix, store::DType::Float64);
    out.insert(out.end(), block.begin(), block.end());
  }
  return out;
}

void write_checkpoint(const std::filesystem::path& path, const CalmModel& model,
                      ordered_json metadata) {
  store::write_file_atomic(path, encode_checkpoint(model, std::move(metadata)));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  const auto bytes = store::read_file(path);
  const std::string src = path.string();
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw FormatError(src + ": not a checkpoint (bad magic)");
  std::uint32_t version = 0;
  for (int i = 3; i >= 0; --i) version = (version << 8) | bytes[8 + i];
  if (version != kCheckpointVersion)
    throw FormatError(src + ": unsupported checkpoint version " + std::to_string(version));
  std::uint64_t len = 0;
  for (int i = 7; i >= 0; --i) len = (len << 8) | bytes[12 + i];
  if (len > bytes.size() - 20) throw FormatError(src + ": truncated metadata");

  Checkpoint ck;
  try {
    ck.metadata = ordered_json::parse(bytes.begin() + 20, bytes.begin() + 20 + static_cast<std::ptrdiff_t>(len));
  } catch (const ordered_json::exception& e) {
    throw FormatError(src + ": metadata is not valid JSON: " + e.what());
  }
  std::size_t offset = 20 + len;
  for (const auto& entry : ck.metadata.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    Tensor t = store::decode_block(bytes, offset, src + " [" + name + "]", true);
    ck.tensors.push_back({name, t});
  }
  if (offset != bytes.size()) throw FormatError(src + ": trailing bytes after tensor blocks");
  return ck;
}

CalmModel model_from_checkpoint(const Checkpoint& ck) {
  const RunConfig config = run_config_from_json(ck.metadata.at("config"));
  const auto labels = ck.metadata.at("labels").get<std::vector<std::string>>();
  const auto tmpl = ck.metadata.value("prompt_template", std::string("The content of [label]"));

  auto find = [&ck](const std::string& name) -> const Tensor& {
    for (const auto& t : ck.tensors)
      if (t.name == name) return t.tensor;
    throw FormatError("checkpoint is missing tensor '" + name + "'");
  };

  Rng unused(0, "init");
  CalmModel model = CalmModel::init(config.model, AnchorSet(find("anchors.base"), labels, tmpl), unused);
  for (auto& p : model.parameters()) {
    const Tensor& src = find(p.name);
    if (src.size() != p.tensor.size())
      throw FormatError("checkpoint tensor '" + p.name + "' has " + std::to_string(src.size()) +
                        " values, model expects " + std::to_string(p.tensor.size()));
    Tensor dst = p.tensor;
    std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
  }
  return model;
}

}  // namespace calm
