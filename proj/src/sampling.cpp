#include "bmm/sampling.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <string>

#include "bmm/errors.hpp"
#include "bmm/random.hpp"

namespace bmm {
namespace {

inline double raw_probability(double x, double threshold) noexcept {
  if (x == 0.0) return 0.0;
  if (threshold == 0.0) return 1.0;
  return 1.0 / (1.0 + (threshold / x) / x);
}

void check_finite(std::span<const double> values) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j])) {
      throw DataError("non-finite value at index " + std::to_string(j));
    }
  }
}

void check_probability(double p, bool allow_zero) {
  if (!(p >= 0.0 && p <= 1.0) || (!allow_zero && p == 0.0)) {
    throw ConfigError("probability " + std::to_string(p) + " out of range");
  }
}

[[maybe_unused]] bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace

double inclusion_probability(double x, double threshold) noexcept {
  const double p = raw_probability(x, threshold);
  return (x != 0.0 && p < kMinProbability) ? kMinProbability : p;
}

std::vector<double> assign_probabilities(std::span<const double> values, double threshold) {
  if (!(threshold >= 0.0) || !std::isfinite(threshold)) {
    throw ConfigError("threshold must be finite and non-negative");
  }
  check_finite(values);
  std::vector<double> probs(values.size());
  std::transform(values.begin(), values.end(), probs.begin(),
                 [threshold](double x) { return inclusion_probability(x, threshold); });
  return probs;
}

SamplingPlan plan_for_threshold(std::span<const double> values, double threshold) {
  SamplingPlan plan;
  plan.threshold = threshold;
  plan.probs = assign_probabilities(values, threshold);
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (values[j] != 0.0 && raw_probability(values[j], threshold) < kMinProbability) {
      ++plan.clamped;
    }
    plan.target_n += plan.probs[j];
  }
  plan.exact_mode = threshold == 0.0;
  return plan;
}

SamplingPlan solve_threshold(std::span<const double> values, double n) {
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw ConfigError("invalid sample size: " + std::to_string(n));
  }
  check_finite(values);

  double scale = 0.0;
  std::size_t nonzero = 0;
  for (double x : values) {
    if (x != 0.0) {
      ++nonzero;
      scale = std::max(scale, std::abs(x));
    }
  }
  if (nonzero == 0) throw DataError("no mass to sample");

  if (n >= static_cast<double>(nonzero)) {
    SamplingPlan plan = plan_for_threshold(values, 0.0);
    plan.target_n = static_cast<double>(nonzero);
    return plan;
  }

  // Solve on values normalized to max |y| = 1, then rescale C by scale^2.
  std::vector<double> scaled(values.size());
  std::transform(values.begin(), values.end(), scaled.begin(),
                 [scale](double x) { return x / scale; });
  auto expected_size = [&scaled](double c) {
    double sum = 0.0;
    for (double y : scaled) sum += raw_probability(y, c);
    return sum;
  };

  // At C = d * max(y^2) / n every term is at most y^2 / C, so the sum is <= n.
  double lo = 0.0;
  double hi = static_cast<double>(values.size()) / n;
  double mid = hi;
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    mid = 0.5 * (lo + hi);
    const double sum = expected_size(mid);
    // Margin below the tolerance absorbs rounding when the plan is rebuilt
    // from the unscaled values.
    if (std::abs(sum - n) <= 0.25 * kThresholdTolerance * n) break;
    (sum > n ? lo : hi) = mid;
  }

  const double threshold = mid * scale * scale;
  if (!std::isfinite(threshold)) throw DataError("threshold overflow");
  SamplingPlan plan = plan_for_threshold(values, threshold);
  plan.target_n = n;
  return plan;
}

double sample_size_for_ratio(std::uint64_t dimension, double ratio) {
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) {
    throw ConfigError("compression ratio must be >= 1, got " + std::to_string(ratio));
  }
  if (dimension == 0) throw ConfigError("dimension must be positive");
  return static_cast<double>(dimension) / ratio;
}

SampleDraw poisson_sample(const SiteVector& vector, const SamplingPlan& plan,
                          std::uint64_t seed, std::uint32_t trial) {
  if (plan.probs.size() != vector.size()) {
    throw ConfigError("sampling plan has " + std::to_string(plan.probs.size()) +
                      " probabilities for a vector of " + std::to_string(vector.size()));
  }
  SampleDraw draw;
  draw.seed = seed;
  draw.trial = trial;
  const auto keys = vector.keys();
  const auto values = vector.values();
  const CounterUniform uniform(seed, Stream::kSampling, vector.site_id(), trial);
  // Written branch-free: every candidate is stored, the cursor advances only
  // on inclusion.
  draw.included.resize(values.size());
  std::size_t taken = 0;
  // Keys 2m and 2m+1 share one generator block.
  std::uint64_t cached_pair = ~std::uint64_t{0};
  Philox4x32::Counter block{};
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double p = plan.probs[j];
    if (p <= 0.0) continue;
    ++draw.draw_count;
    const std::uint64_t pair = keys[j] >> 1;
    if (pair != cached_pair) {
      block = uniform.pair_block(pair);
      cached_pair = pair;
    }
    draw.included[taken] = {keys[j], values[j]};
    taken += (p >= 1.0) | (CounterUniform::half(block, keys[j] & 1) < p);
  }
  draw.included.resize(taken);
  return draw;
}

double minmax_point_estimate(double raw_value, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DataError("sampled value with probability " + std::to_string(p));
  }
  return raw_value / p;
}

double analytic_minmax_mse(double x, double p) {
  if (p == 0.0) throw ConfigError("undefined MSE at p = 0");
  check_probability(p, false);
  const double deviation = x / p - x;
  [[maybe_unused]] const double expanded = p * deviation * deviation + (1.0 - p) * x * x;
  const double closed = x * x * (1.0 - p) / p;
  assert(close_relative(expanded, closed, 1e-12));
  return closed;
}

Moments analytic_bminmax_moments(double x, double p) {
  check_probability(p, true);
  Moments m;
  m.bias = x * (p - 1.0);
  m.variance = p * (1.0 - p) * x * x;
  m.mse = x * x * (1.0 - p);
  assert(close_relative(m.mse, m.variance + m.bias * m.bias, 1e-12));
  return m;
}

double mse_gap(double x, double p) {
  if (x == 0.0 || !std::isfinite(x) || !(p > 0.0 && p < 1.0)) {
    throw ConfigError("assumption violated: need x != 0 and 0 < p < 1");
  }
  const double q = p - 1.0;
  return x * x * q * q / p;
}

}  // namespace bmm
