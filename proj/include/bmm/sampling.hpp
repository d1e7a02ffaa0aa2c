#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bmm/types.hpp"

namespace bmm {

// Lower bound applied to the probability of a nonzero element so that
// x / p stays finite downstream.
inline constexpr double kMinProbability = 1e-308;

// Relative tolerance on |sum p - n| / n for the threshold solve.
inline constexpr double kThresholdTolerance = 1e-9;
inline constexpr int kMaxBisectionSteps = 200;

// p = x^2 / (x^2 + C), evaluated as 1 / (1 + (C / x) / x) so that large |x|
// does not overflow. Zero carries no mass (p = 0); C = 0 gives p = 1 for any
// nonzero x. Nonzero x never gets p below kMinProbability.
double inclusion_probability(double x, double threshold) noexcept;

std::vector<double> assign_probabilities(std::span<const double> values, double threshold);

// Solves sum_j x_j^2 / (x_j^2 + C) = n for C by bisection. When n is at least
// the number of nonzero values the plan is exact: C = 0, every nonzero
// element has p = 1.
//
// Throws ConfigError for n <= 0 (or non-finite n) and DataError for
// non-finite values or an all-zero vector.
SamplingPlan solve_threshold(std::span<const double> values, double n);

// Plan for a caller-chosen threshold; target_n is the resulting expected size.
SamplingPlan plan_for_threshold(std::span<const double> values, double threshold);

// Expected sample size for a compression ratio r = d / n.
double sample_size_for_ratio(std::uint64_t dimension, double ratio);

// Includes every entry independently with its planned probability. Draws are
// a pure function of (seed, site id, trial, key).
SampleDraw poisson_sample(const SiteVector& vector, const SamplingPlan& plan,
                          std::uint64_t seed, std::uint32_t trial = 0);

// Unbiased MinMax estimate of a sampled value: raw / p. Absent keys estimate
// to 0 and never reach this function.
double minmax_point_estimate(double raw_value, double p);

// MSE of the MinMax estimator for one element, x^2 (1 - p) / p.
double analytic_minmax_mse(double x, double p);

struct Moments {
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
};

// Bias x(p - 1), variance (p - p^2) x^2 and MSE x^2 (1 - p) of the B-MinMax
// estimator for one element.
Moments analytic_bminmax_moments(double x, double p);

// MSE(MinMax) - MSE(B-MinMax) = x^2 (p - 1)^2 / p. Requires x != 0 and
// 0 < p < 1.
double mse_gap(double x, double p);

}  // namespace bmm
