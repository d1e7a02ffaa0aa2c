#include "bmm/aggregation.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "bmm/errors.hpp"
#include "bmm/sampling.hpp"

namespace bmm {

SiteSummary compute_site_summary(const SiteVector& vector, const SamplingPlan& plan) {
  if (plan.probs.size() != vector.size()) {
    throw ConfigError("sampling plan does not match vector");
  }
  const auto values = vector.values();
  double variance = 0.0;
  double abs_bias = 0.0;
  double variance_mm = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double x = values[j];
    const double p = plan.probs[j];
    if (x == 0.0) continue;
    variance += p * (1.0 - p) * x * x;
    abs_bias += std::abs(x * (p - 1.0));
    variance_mm += x * x * (1.0 - p) / p;
  }
  const auto d = static_cast<double>(vector.dimension());
  return {variance / d, abs_bias / d, variance_mm / d};
}

SitePayload prepare_payload(const SiteVector& vector, const SamplingPlan& plan,
                            const SampleDraw& draw, bool unbiased_requested) {
  SitePayload payload;
  payload.site_id = vector.site_id();
  payload.dimension = vector.dimension();
  payload.threshold = plan.threshold;
  payload.target_n = plan.target_n;
  payload.unbiased_requested = unbiased_requested;
  payload.summary = compute_site_summary(vector, plan);
  payload.entries = draw.included;
  return payload;
}

MseEstimate estimate_aggregate_mse(std::span<const SiteSummary> summaries) {
  if (summaries.empty()) throw ConfigError("no site summaries to estimate from");
  double variance = 0.0;
  double bias = 0.0;
  double variance_mm = 0.0;
  for (const auto& s : summaries) {
    variance += s.v_bar;
    bias += std::abs(s.b_bar);
    variance_mm += s.v_bar_mm;
  }
  return {variance + bias * bias, variance_mm};
}

double decode_value(double raw_value, double threshold, EstimatorMode mode) {
  if (mode == EstimatorMode::kBMinMax) return raw_value;
  const double p = inclusion_probability(raw_value, threshold);
  if (p == 0.0) throw DataError("corrupt payload: transmitted value has zero probability");
  return raw_value / p;
}

KeyedEstimates aggregate_fixed(std::span<const SitePayload> payloads, EstimatorMode mode) {
  KeyedEstimates out;
  for (const auto& payload : payloads) {
    for (const auto& e : payload.entries) {
      out[e.key] += decode_value(e.value, payload.threshold, mode);
    }
  }
  return out;
}

AggregateEstimate adaptive_aggregate(std::span<const SitePayload> payloads) {
  std::vector<SiteSummary> summaries;
  summaries.reserve(payloads.size());
  for (const auto& p : payloads) summaries.push_back(p.summary);
  const MseEstimate est = estimate_aggregate_mse(summaries);

  AggregateEstimate result;
  result.mode = select_mode(est);
  result.est_mse_bminmax = est.bminmax;
  result.est_mse_minmax = est.minmax;
  result.sites_merged = payloads.size();
  result.estimates = aggregate_fixed(payloads, result.mode);
  return result;
}

std::string_view to_string(EstimatorMode mode) noexcept {
  return mode == EstimatorMode::kBMinMax ? "bminmax" : "minmax";
}

}  // namespace bmm
