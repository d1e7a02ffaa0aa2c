#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string_view>

#include "bmm/types.hpp"

namespace bmm {

// Averages of the element-wise B-MinMax variance, |bias| and MinMax variance
// over all d elements of the site (zeros contribute 0).
SiteSummary compute_site_summary(const SiteVector& vector, const SamplingPlan& plan);

// Assembles what a site transmits for one draw.
SitePayload prepare_payload(const SiteVector& vector, const SamplingPlan& plan,
                            const SampleDraw& draw, bool unbiased_requested = false);

struct MseEstimate {
  double bminmax = 0.0;
  double minmax = 0.0;
};

// Per-element aggregate MSE estimates from constant-size site summaries:
//   B-MinMax: sum_i v_bar_i + (sum_i b_bar_i)^2
//   MinMax:   sum_i v_bar_mm_i
// Throws ConfigError on an empty list.
MseEstimate estimate_aggregate_mse(std::span<const SiteSummary> summaries);

// B-MinMax wins ties.
inline EstimatorMode select_mode(const MseEstimate& estimate) noexcept {
  return estimate.bminmax <= estimate.minmax ? EstimatorMode::kBMinMax
                                             : EstimatorMode::kMinMax;
}

// Contribution of one received raw value under `mode`. MinMax reconstructs
// p = x^2 / (x^2 + C) from the value and the site's threshold; a value whose
// reconstructed probability is 0 cannot have been sampled and is rejected.
double decode_value(double raw_value, double threshold, EstimatorMode mode);

using KeyedEstimates = std::map<std::uint64_t, double>;

// Per-key sum of decoded values across payloads. Keys absent from every
// payload are implicitly 0.
KeyedEstimates aggregate_fixed(std::span<const SitePayload> payloads, EstimatorMode mode);

struct AggregateEstimate {
  KeyedEstimates estimates;
  EstimatorMode mode = EstimatorMode::kBMinMax;
  double est_mse_bminmax = 0.0;
  double est_mse_minmax = 0.0;
  std::size_t sites_merged = 0;
};

// Picks the estimator with the smaller estimated aggregate MSE, then
// aggregates with it. The decision is global: every key uses the same mode.
AggregateEstimate adaptive_aggregate(std::span<const SitePayload> payloads);

std::string_view to_string(EstimatorMode mode) noexcept;

}  // namespace bmm
