#pragma once

#include <array>
#include <cstdint>

namespace bmm {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every output
// block is a pure function of (counter, key), so any draw can be reproduced
// without replaying a stream.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr std::uint32_t kMulA = 0xD2511F53u;
  static constexpr std::uint32_t kMulB = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  static constexpr std::uint32_t kWeylB = 0xBB67AE85u;

  static constexpr Counter block(Counter c, Key k) noexcept {
    std::uint32_t c0 = c[0], c1 = c[1], c2 = c[2], c3 = c[3];
    std::uint32_t k0 = k[0], k1 = k[1];
#pragma GCC unroll 10
    for (int r = 0; r < 10; ++r) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * c0;
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * c2;
      const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
      const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
      c1 = static_cast<std::uint32_t>(p1);
      c3 = static_cast<std::uint32_t>(p0);
      c0 = n0;
      c2 = n2;
      k0 += kWeylA;
      k1 += kWeylB;
    }
    return {c0, c1, c2, c3};
  }
};

// Independent random streams derived from one user seed.
enum class Stream : std::uint32_t {
  kSampling = 0x53414d50u,  // "SAMP"
  kZipf = 0x5a495046u,      // "ZIPF"
};

// Uniform variates in [0, 1) with 53 random bits, addressed by
// (seed, stream, site, a, b). Sampling uses a = trial, b = key; data
// generation uses a = 0, b = element index. Indices 2m and 2m+1 take the two
// 64-bit halves of the same Philox block.
class CounterUniform {
 public:
  constexpr CounterUniform(std::uint64_t seed, Stream stream, std::uint32_t site,
                           std::uint32_t a) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32) ^ static_cast<std::uint32_t>(stream)},
        site_(site),
        a_(a) {}

  constexpr double operator()(std::uint64_t b) const noexcept {
    return half(pair_block(b >> 1), b & 1);
  }

  // Block shared by indices 2 * pair and 2 * pair + 1.
  constexpr Philox4x32::Counter pair_block(std::uint64_t pair) const noexcept {
    return Philox4x32::block(
        {site_, a_, static_cast<std::uint32_t>(pair), static_cast<std::uint32_t>(pair >> 32)}, key_);
  }

  static constexpr double half(const Philox4x32::Counter& out, std::uint64_t which) noexcept {
    const std::uint64_t bits = which == 0
        ? (static_cast<std::uint64_t>(out[0]) << 32) | out[1]
        : (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
  }

 private:
  Philox4x32::Key key_;
  std::uint32_t site_;
  std::uint32_t a_;
};

inline double counter_uniform(std::uint64_t seed, Stream stream, std::uint32_t site,
                              std::uint32_t a, std::uint64_t b) noexcept {
  return CounterUniform(seed, stream, site, a)(b);
}

}  // namespace bmm
