#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bmm {

struct KeyedValue {
  std::uint64_t key = 0;
  double value = 0.0;

  friend bool operator==(const KeyedValue&, const KeyedValue&) = default;
};

// A site's local vector. Keys are strictly increasing; all values are finite.
// For a dense vector the keys are 0..d-1 and dimension() == size(); a sparse
// vector declares a key-space size of at least size().
class SiteVector {
 public:
  SiteVector() = default;
  SiteVector(std::uint32_t site_id, std::vector<std::uint64_t> keys,
             std::vector<double> values, std::uint64_t dimension);

  static SiteVector dense(std::uint32_t site_id, std::vector<double> values);

  std::uint32_t site_id() const noexcept { return site_id_; }
  std::span<const std::uint64_t> keys() const noexcept { return keys_; }
  std::span<const double> values() const noexcept { return values_; }
  std::uint64_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return values_.size(); }

 private:
  std::uint32_t site_id_ = 0;
  std::vector<std::uint64_t> keys_;
  std::vector<double> values_;
  std::uint64_t dimension_ = 0;
};

// Inclusion probabilities for one site, aligned index-by-index with the
// entries of the vector the plan was built for.
struct SamplingPlan {
  double threshold = 0.0;
  std::vector<double> probs;
  double target_n = 0.0;
  bool exact_mode = false;
  // Number of probabilities raised to kMinProbability after the solve.
  std::size_t clamped = 0;
};

// One Poisson draw. Included entries carry the raw value x, never x / p.
struct SampleDraw {
  std::vector<KeyedValue> included;
  std::uint64_t seed = 0;
  std::uint32_t trial = 0;
  // Number of Bernoulli trials performed (entries with p > 0).
  std::size_t draw_count = 0;
};

// Per-site averages over all d local elements: B-MinMax variance, absolute
// B-MinMax bias, and MinMax variance.
struct SiteSummary {
  double v_bar = 0.0;
  double b_bar = 0.0;
  double v_bar_mm = 0.0;

  friend bool operator==(const SiteSummary&, const SiteSummary&) = default;
};

enum class EstimatorMode { kBMinMax, kMinMax };

// The unit a site transmits to the coordinator.
struct SitePayload {
  std::uint32_t site_id = 0;
  std::uint64_t dimension = 0;
  double threshold = 0.0;
  // Expected sample size the threshold was solved for.
  double target_n = 0.0;
  // Sender asks the coordinator for the unbiased (MinMax) decoding.
  bool unbiased_requested = false;
  SiteSummary summary;
  std::vector<KeyedValue> entries;

  friend bool operator==(const SitePayload&, const SitePayload&) = default;
};

}  // namespace bmm
