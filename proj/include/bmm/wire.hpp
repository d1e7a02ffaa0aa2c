#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bmm/types.hpp"

// Payload byte layout, all fields little-endian:
//
//   offset  size  field
//        0     4  magic "BMMX"
//        4     4  format version (1)
//        8     4  site id
//       12     4  flags (bit 0: unbiased decode requested; others zero)
//       16     8  dimension d
//       24     8  threshold C (f64)
//       32     8  entry count m
//       40     8  target sample size n (f64)
//       48    24  summary v_bar, b_bar, v_bar_mm (f64 each)
//       72  16*m  entries: key (u64), raw value (f64), sorted by key
namespace bmm::wire {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::size_t kPrefixBytes = 8;
inline constexpr std::size_t kHeaderBytes = 40;
inline constexpr std::size_t kSummaryBytes = 24;
inline constexpr std::size_t kEntryBytes = 16;
inline constexpr std::size_t kFixedBytes = kPrefixBytes + kHeaderBytes + kSummaryBytes;

constexpr std::size_t encoded_size(std::size_t entries) noexcept {
  return kFixedBytes + kEntryBytes * entries;
}

// Throws DataError if entry keys are unsorted or duplicated.
std::vector<std::uint8_t> encode_payload(const SitePayload& payload);

// Throws DataError: "unsupported format" for a bad magic, version or flags,
// "truncated payload" for a short buffer, "corrupt value" for non-finite or
// out-of-range fields.
SitePayload decode_payload(std::span<const std::uint8_t> bytes);

struct CompressionRatios {
  double nominal = 0.0;     // d / n
  double byte_ratio = 0.0;  // 8 d / encoded bytes
};

CompressionRatios effective_compression(const SitePayload& payload, double expected_n);

// Uses the target sample size carried in the payload.
CompressionRatios effective_compression(const SitePayload& payload);

void write_payload_file(const std::filesystem::path& path, const SitePayload& payload);
SitePayload read_payload_file(const std::filesystem::path& path);

}  // namespace bmm::wire
