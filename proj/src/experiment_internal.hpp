#pragma once

#include <memory>
#include <vector>

#include "bmm/experiment.hpp"
#include "bmm/zipf.hpp"

namespace bmm::detail {

// Loads the data source once and builds site vectors for any site count.
// Zipf sites depend only on (seed, site index), so site i is identical
// across site counts.
class SiteFactory {
 public:
  explicit SiteFactory(const ExperimentConfig& config);
  std::vector<SiteVector> build(std::uint32_t sites) const;

 private:
  ExperimentConfig config_;
  std::shared_ptr<const ZipfTable> zipf_;
  std::vector<double> file_values_;
};

std::vector<ResultRow> run_with(const ExperimentConfig& config, const SiteFactory& factory);

}  // namespace bmm::detail
