#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>

#include "bmm/errors.hpp"
#include "bmm/wire.hpp"

namespace bmm::wire {
namespace {

SitePayload random_payload(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::uniform_int_distribution<std::size_t> count(0, 64);
  SitePayload p;
  p.site_id = static_cast<std::uint32_t>(rng());
  p.dimension = 1 + rng() % 1000000;
  p.threshold = std::abs(u(rng));
  p.target_n = 1 + std::abs(u(rng));
  p.unbiased_requested = rng() % 2 == 0;
  p.summary = {std::abs(u(rng)), std::abs(u(rng)), std::abs(u(rng))};
  std::uint64_t key = rng() % 100;
  for (std::size_t i = count(rng); i > 0; --i) {
    key += 1 + rng() % 1000;
    p.entries.push_back({key, u(rng)});
  }
  return p;
}

SitePayload two_entry_payload() {
  SitePayload p;
  p.site_id = 3;
  p.dimension = 100;
  p.threshold = 2.5;
  p.target_n = 25;
  p.summary = {0.5, 0.25, 1.0};
  p.entries = {{1, -2.0}, {70, 3.5}};
  return p;
}

TEST(Wire, SizeFormula) {
  SitePayload empty;
  empty.dimension = 1;
  EXPECT_EQ(encode_payload(empty).size(), 72u);
  EXPECT_EQ(encode_payload(two_entry_payload()).size(), 104u);
  EXPECT_EQ(encoded_size(0), 72u);
  EXPECT_EQ(encoded_size(25), 472u);
}

TEST(Wire, FixedLayout) {
  const auto bytes = encode_payload(two_entry_payload());
  const std::vector<std::uint8_t> prefix{'B', 'M', 'M', 'X', 1, 0, 0, 0, 3, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), bytes.begin()));
  // d = 100 little-endian at offset 16, entry count 2 at offset 32.
  EXPECT_EQ(bytes[16], 100);
  EXPECT_EQ(bytes[32], 2);
  // First key at offset 72, second at 88.
  EXPECT_EQ(bytes[72], 1);
  EXPECT_EQ(bytes[88], 70);
  // 2.5 = 0x4004000000000000
  EXPECT_EQ(bytes[31], 0x40);
  EXPECT_EQ(bytes[30], 0x04);
}

TEST(WireProperty, RoundTripBitExact) {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 10000; ++i) {
    const auto p = random_payload(rng);
    const auto bytes = encode_payload(p);
    ASSERT_EQ(bytes.size(), encoded_size(p.entries.size()));
    const auto back = decode_payload(bytes);
    ASSERT_EQ(back, p);
    ASSERT_EQ(encode_payload(back), bytes);
  }
}

TEST(Wire, RejectsEveryBitFlipInMagicAndVersion) {
  const auto bytes = encode_payload(two_entry_payload());
  for (std::size_t bit = 0; bit < 64; ++bit) {
    auto corrupt = bytes;
    corrupt[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    try {
      decode_payload(corrupt);
      FAIL() << "bit " << bit << " accepted";
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find("unsupported format"), std::string::npos);
    }
  }
}

TEST(Wire, RejectsTruncation) {
  const auto bytes = encode_payload(two_entry_payload());
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    std::span<const std::uint8_t> cut(bytes.data(), len);
    EXPECT_THROW(decode_payload(cut), DataError) << len;
  }
  try {
    decode_payload(std::span<const std::uint8_t>(bytes.data(), 96));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated payload"), std::string::npos);
  }
}

TEST(Wire, RejectsTrailingBytes) {
  auto bytes = encode_payload(two_entry_payload());
  bytes.push_back(0);
  EXPECT_THROW(decode_payload(bytes), DataError);
}

TEST(Wire, RejectsNaNValue) {
  auto bytes = encode_payload(two_entry_payload());
  const auto nan = std::bit_cast<std::uint64_t>(std::numeric_limits<double>::quiet_NaN());
  for (int b = 0; b < 8; ++b) bytes[80 + b] = static_cast<std::uint8_t>(nan >> (8 * b));
  try {
    decode_payload(bytes);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("corrupt value"), std::string::npos);
  }
}

TEST(Wire, RejectsUnknownFlagsAndUnsortedKeys) {
  auto flags = encode_payload(two_entry_payload());
  flags[12] |= 0x80;
  EXPECT_THROW(decode_payload(flags), DataError);

  auto unsorted = encode_payload(two_entry_payload());
  unsorted[88] = 0;  // second key becomes 0 < 1
  EXPECT_THROW(decode_payload(unsorted), DataError);

  auto p = two_entry_payload();
  p.entries = {{5, 1.0}, {5, 2.0}};
  EXPECT_THROW(encode_payload(p), DataError);
  p.entries = {{6, 1.0}, {5, 2.0}};
  EXPECT_THROW(encode_payload(p), DataError);
}

TEST(Wire, EffectiveCompression) {
  SitePayload p;
  p.dimension = 10000;
  EXPECT_DOUBLE_EQ(effective_compression(p, 2500).nominal, 4.0);

  SitePayload q;
  q.dimension = 100;
  q.target_n = 25;
  for (std::uint64_t k = 0; k < 25; ++k) q.entries.push_back({k, 1.0});
  const auto r = effective_compression(q);
  EXPECT_DOUBLE_EQ(r.nominal, 4.0);
  EXPECT_NEAR(r.byte_ratio, 800.0 / 472.0, 1e-12);
  EXPECT_NEAR(r.byte_ratio, 1.695, 1e-3);

  q.target_n = 100;
  EXPECT_DOUBLE_EQ(effective_compression(q).nominal, 1.0);
  EXPECT_THROW(effective_compression(SitePayload{}, 1.0), ConfigError);
}

TEST(Wire, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "bmm_wire_test.bmmx";
  const auto p = two_entry_payload();
  write_payload_file(path, p);
  EXPECT_EQ(std::filesystem::file_size(path), 104u);
  EXPECT_EQ(read_payload_file(path), p);
  std::filesystem::remove(path);
  EXPECT_THROW(read_payload_file(path), DataError);
}

}  // namespace
}  // namespace bmm::wire
