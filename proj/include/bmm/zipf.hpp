#pragma once

#include <cstdint>
#include <vector>

#include "bmm/types.hpp"

namespace bmm {

// Zipf law on {1..N} with P(j) proportional to j^-s, sampled by inverse CDF
// over a precomputed normalized table.
class ZipfTable {
 public:
  ZipfTable(double exponent, std::uint64_t support);

  double exponent() const noexcept { return exponent_; }
  std::uint64_t support() const noexcept { return cdf_.size(); }
  double pmf(std::uint64_t j) const;

  // Smallest j with CDF(j) > u, for u in [0, 1).
  std::uint64_t quantile(double u) const noexcept;

 private:
  double exponent_;
  std::vector<double> cdf_;
};

// d i.i.d. Zipf draws as a dense vector; deterministic per (seed, site_id).
SiteVector gen_zipf(std::uint64_t dimension, const ZipfTable& table, std::uint64_t seed,
                    std::uint32_t site_id = 0);

SiteVector gen_zipf(std::uint64_t dimension, double exponent, std::uint64_t support,
                    std::uint64_t seed, std::uint32_t site_id = 0);

}  // namespace bmm
