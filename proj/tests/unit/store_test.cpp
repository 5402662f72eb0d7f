#include <gtest/gtest.h>

#include <cstring>
#include <fstream>

#include "calm/checkpoint.hpp"
#include "calm/error.hpp"
#include "calm/store.hpp"
#include "test_util.hpp"

namespace calm {
namespace {

namespace fs = std::filesystem;

Tensor f32_matrix(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-10, 10));
  return Tensor({r, c}, v);
}

TEST(Store, RoundTripIsBitwiseExact) {
  Rng rng(1);
  auto dir = testing::scratch_dir("store_rt");
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{3, 2}, {1, 1}, {17, 9}}) {
    Tensor m = f32_matrix(r, c, rng);
    store::write_store(dir / "m.calm", m);
    Tensor back = store::read_store(dir / "m.calm");
    ASSERT_EQ(back.shape(), m.shape());
    EXPECT_EQ(std::memcmp(back.data().data(), m.data().data(), m.size() * sizeof(double)), 0);
    auto bytes = store::read_file(dir / "m.calm");
    EXPECT_EQ(bytes, store::encode(back));
    EXPECT_EQ(bytes.size(), store::kHeaderSize + 4 * r * c);
  }
}

TEST(Store, HeaderLayout) {
  Tensor m = Tensor::matrix({{1, 2}, {3, 4}, {5, 6}});
  auto b = store::encode(m);
  ASSERT_EQ(b.size(), 28u + 24u);
  EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "CALM");
  EXPECT_EQ(b[4], 1);  // version, little endian
  EXPECT_EQ(b[8], 0);  // f32
  EXPECT_EQ(b[12], 3);  // rows
  EXPECT_EQ(b[20], 2);  // dim
  float first;
  std::memcpy(&first, b.data() + 28, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(Store, EmptyMatrixIsHeaderOnly) {
  auto b = store::encode(Tensor::zeros({0, 5}));
  EXPECT_EQ(b.size(), 28u);
  Tensor back = store::decode(b);
  EXPECT_EQ(back.rows(), 0u);
  EXPECT_EQ(back.cols(), 5u);
}

TEST(Store, TruncationRejected) {
  auto b = store::encode(Tensor::matrix({{1, 2}, {3, 4}}));
  for (std::size_t len = 0; len < b.size(); ++len) {
    std::vector<std::uint8_t> cut(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(len));
    EXPECT_THROW(store::decode(cut), FormatError) << len;
  }
  b.push_back(0);
  EXPECT_THROW(store::decode(b), FormatError);
}

TEST(Store, EverySingleByteHeaderMutationRejected) {
  const auto good = store::encode(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
  for (std::size_t i = 0; i < store::kHeaderSize; ++i) {
    for (int delta : {1, 0x80, 0xff}) {
      auto bad = good;
      bad[i] = static_cast<std::uint8_t>(bad[i] ^ delta);
      EXPECT_THROW(store::decode(bad), FormatError) << "byte " << i << " xor " << delta;
    }
  }
}

TEST(Store, Float64OnlyInsideCheckpoints) {
  auto b = store::encode(Tensor::matrix({{0.1, 0.2}}), store::DType::Float64);
  EXPECT_THROW(store::decode(b), FormatError);
  std::size_t off = 0;
  Tensor t = store::decode_block(b, off, "mem", true);
  EXPECT_EQ(t[0], 0.1);
  EXPECT_EQ(off, b.size());
}

TEST(Store, MissingFileIsIoError) {
  EXPECT_THROW(store::read_store("/nonexistent/dir/x.calm"), IoError);
}

TEST(Store, OverflowingSizeRejected) {
  auto b = store::encode(Tensor::matrix({{1}}));
  for (int i = 12; i < 28; ++i) b[i] = 0xff;
  EXPECT_THROW(store::decode(b), FormatError);
}

TEST(Checksum, KnownVector) {
  std::string abc = "abc";
  EXPECT_EQ(sha256_hex({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()}),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace calm
