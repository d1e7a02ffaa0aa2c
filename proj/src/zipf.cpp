#include "bmm/zipf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bmm/errors.hpp"
#include "bmm/random.hpp"

namespace bmm {

ZipfTable::ZipfTable(double exponent, std::uint64_t support) : exponent_(exponent) {
  if (!(exponent > 0.0) || !std::isfinite(exponent)) {
    throw ConfigError("zipf exponent must be positive");
  }
  if (support < 2) throw ConfigError("zipf support must be at least 2");
  cdf_.resize(support);
  // Sum from the tail so small terms are not swamped.
  double total = 0.0;
  for (std::uint64_t j = support; j >= 1; --j) total += std::pow(static_cast<double>(j), -exponent);
  double running = 0.0;
  for (std::uint64_t j = 1; j <= support; ++j) {
    running += std::pow(static_cast<double>(j), -exponent);
    cdf_[j - 1] = running / total;
  }
  cdf_.back() = 1.0;
}

double ZipfTable::pmf(std::uint64_t j) const {
  if (j < 1 || j > cdf_.size()) return 0.0;
  return j == 1 ? cdf_[0] : cdf_[j - 1] - cdf_[j - 2];
}

std::uint64_t ZipfTable::quantile(double u) const noexcept {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) return cdf_.size();
  return static_cast<std::uint64_t>(it - cdf_.begin()) + 1;
}

SiteVector gen_zipf(std::uint64_t dimension, const ZipfTable& table, std::uint64_t seed,
                    std::uint32_t site_id) {
  if (dimension == 0) throw ConfigError("dimension must be positive");
  std::vector<double> values(dimension);
  for (std::uint64_t j = 0; j < dimension; ++j) {
    const double u = counter_uniform(seed, Stream::kZipf, site_id, 0, j);
    values[j] = static_cast<double>(table.quantile(u));
  }
  return SiteVector::dense(site_id, std::move(values));
}

SiteVector gen_zipf(std::uint64_t dimension, double exponent, std::uint64_t support,
                    std::uint64_t seed, std::uint32_t site_id) {
  return gen_zipf(dimension, ZipfTable(exponent, support), seed, site_id);
}

}  // namespace bmm
