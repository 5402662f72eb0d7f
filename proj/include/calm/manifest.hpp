#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "calm/model.hpp"
#include "calm/tensor.hpp"

namespace calm {

/// JSON description of a paired corpus. Store paths are relative to the
/// manifest's directory.
struct Manifest {
  std::vector<std::string> ids;
  std::string video_store;
  std::string text_store;
  std::size_t frames_per_video = 1;
  std::string anchor_store;  // optional
  std::vector<std::string> labels;
  std::string prompt_template = "The content of [label]";
  std::map<std::string, std::vector<std::string>> splits;  // train / val / test
  std::vector<std::size_t> classes;  // optional, per id

  std::string to_json_text() const;
  static Manifest from_json_text(const std::string& text, const std::string& source);
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// A manifest with its stores loaded and cross-validated.
struct Corpus {
  Manifest manifest;
  std::filesystem::path root;
  Tensor frames;   // [N·T×D]
  Tensor text;     // [N×D]
  Tensor anchors;  // [K×D], undefined if the manifest has none
  std::unordered_map<std::string, std::size_t> index;
  /// SHA-256 over the store files, in manifest order.
  std::string checksum;

  std::size_t size() const { return manifest.ids.size(); }
  std::size_t dim() const { return text.cols(); }
  std::vector<std::size_t> split_indices(const std::string& split) const;
  Batch gather(const std::vector<std::size_t>& indices) const;
};

/// Loads and validates; any row-count or dimension mismatch is a
/// FormatError naming the store.
Corpus load_corpus(const std::filesystem::path& manifest_path);

}  // namespace calm
