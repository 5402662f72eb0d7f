#pragma once

// EmbeddingStore container, shared byte-for-byte with the exporter:
//
//   offset  size  field
//   0       4     magic "CALM"
//   4       4     version, u32 LE (= 1)
//   8       4     dtype, u32 LE (0 = float32)
//   12      8     rows, u64 LE
//   20      8     dim, u64 LE
//   28      ...   rows·dim values, row-major, little-endian
//
// Values are widened to float64 on load. Checkpoints reuse the same block
// layout with dtype 1 (float64); standalone stores accept only dtype 0.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "calm/tensor.hpp"

namespace calm::store {

inline constexpr std::size_t kHeaderSize = 28;
inline constexpr std::uint32_t kVersion = 1;

enum class DType : std::uint32_t { Float32 = 0, Float64 = 1 };

std::vector<std::uint8_t> encode(const Tensor& matrix, DType dtype = DType::Float32);

/// Decodes one block starting at `offset` and advances it past the block.
/// `source` names the file in error messages.
Tensor decode_block(std::span<const std::uint8_t> bytes, std::size_t& offset,
                    const std::string& source, bool allow_float64);

/// Decodes a whole standalone store; trailing bytes are an error.
Tensor decode(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");

void write_store(const std::filesystem::path& path, const Tensor& matrix);
Tensor read_store(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
/// Writes via a sibling temp file and rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace calm::store

namespace calm {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace calm
