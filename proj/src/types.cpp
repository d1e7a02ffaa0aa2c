#include "bmm/types.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "bmm/errors.hpp"

namespace bmm {

SiteVector::SiteVector(std::uint32_t site_id, std::vector<std::uint64_t> keys,
                       std::vector<double> values, std::uint64_t dimension)
    : site_id_(site_id),
      keys_(std::move(keys)),
      values_(std::move(values)),
      dimension_(dimension) {
  if (keys_.size() != values_.size()) {
    throw DataError("site vector: " + std::to_string(keys_.size()) + " keys but " +
                    std::to_string(values_.size()) + " values");
  }
  if (dimension_ == 0 || dimension_ < values_.size()) {
    throw DataError("site vector: dimension " + std::to_string(dimension_) +
                    " is smaller than the entry count " + std::to_string(values_.size()));
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_[j])) {
      throw DataError("site vector: non-finite value at index " + std::to_string(j));
    }
    if (j > 0 && keys_[j] <= keys_[j - 1]) {
      throw DataError("site vector: keys not strictly increasing at index " +
                      std::to_string(j));
    }
  }
}

SiteVector SiteVector::dense(std::uint32_t site_id, std::vector<double> values) {
  std::vector<std::uint64_t> keys(values.size());
  std::iota(keys.begin(), keys.end(), std::uint64_t{0});
  const auto d = static_cast<std::uint64_t>(values.size());
  return SiteVector(site_id, std::move(keys), std::move(values), d);
}

}  // namespace bmm
