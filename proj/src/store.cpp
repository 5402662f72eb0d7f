#include "calm/store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "calm/error.hpp"

namespace calm::store {

namespace {

constexpr char kMagic[4] = {'C', 'A', 'L', 'M'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode(const Tensor& matrix, DType dtype) {
  for (double v : matrix.data())
    if (!std::isfinite(v)) throw NumericError("write_store: matrix has non-finite entries");
  const std::uint64_t rows = matrix.rank() == 2 ? matrix.shape()[0] : 1;
  const std::uint64_t dim = matrix.cols();
  const std::size_t width = dtype == DType::Float32 ? 4 : 8;

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + width * matrix.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(dtype));
  put_u64(out, rows);
  put_u64(out, dim);
  for (double v : matrix.data()) {
    if (dtype == DType::Float32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  return out;
}

Tensor decode_block(std::span<const std::uint8_t> bytes, std::size_t& offset,
                    const std::string& source, bool allow_float64) {
  if (offset > bytes.size() || bytes.size() - offset < kHeaderSize)
    throw FormatError(source + ": truncated header (need 28 bytes)");
  const std::uint8_t* h = bytes.data() + offset;
  if (std::memcmp(h, kMagic, 4) != 0) throw FormatError(source + ": bad magic (expected \"CALM\")");
  const std::uint32_t version = get_u32(h + 4);
  if (version != kVersion)
    throw FormatError(source + ": unsupported version " + std::to_string(version));
  const std::uint32_t dtype = get_u32(h + 8);
  std::size_t width = 0;
  if (dtype == static_cast<std::uint32_t>(DType::Float32)) {
    width = 4;
  } else if (dtype == static_cast<std::uint32_t>(DType::Float64) && allow_float64) {
    width = 8;
  } else {
    throw FormatError(source + ": unsupported dtype " + std::to_string(dtype));
  }
  const std::uint64_t rows = get_u64(h + 12);
  const std::uint64_t dim = get_u64(h + 20);

  std::uint64_t count = 0, payload = 0;
  if (__builtin_mul_overflow(rows, dim, &count) || __builtin_mul_overflow(count, width, &payload))
    throw FormatError(source + ": rows×dim overflows (rows " + std::to_string(rows) + ", dim " +
                      std::to_string(dim) + ")");
  const std::size_t available = bytes.size() - offset - kHeaderSize;
  if (payload > available) {
    throw FormatError(source + ": truncated payload (rows " + std::to_string(rows) + " × dim " +
                      std::to_string(dim) + " needs " + std::to_string(payload) + " bytes, have " +
                      std::to_string(available) + ")");
  }

  std::vector<double> values(count);
  const std::uint8_t* p = h + kHeaderSize;
  for (std::size_t i = 0; i < count; ++i) {
    if (width == 4) {
      values[i] = static_cast<double>(std::bit_cast<float>(get_u32(p + 4 * i)));
    } else {
      values[i] = std::bit_cast<double>(get_u64(p + 8 * i));
    }
  }
  offset += kHeaderSize + payload;
  return Tensor({static_cast<std::size_t>(rows), static_cast<std::size_t>(dim)}, std::move(values));
}

Tensor decode(std::span<const std::uint8_t> bytes, const std::string& source) {
  std::size_t offset = 0;
  Tensor t = decode_block(bytes, offset, source, false);
  if (offset != bytes.size()) {
    throw FormatError(source + ": payload length mismatch (" +
                      std::to_string(bytes.size() - offset) + " trailing bytes)");
  }
  return t;
}

void write_store(const std::filesystem::path& path, const Tensor& matrix) {
  const auto bytes = encode(matrix, DType::Float32);
  write_file_atomic(path, bytes);
}

Tensor read_store(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode(bytes, path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace calm::store
