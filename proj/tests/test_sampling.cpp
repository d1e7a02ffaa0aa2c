#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "bmm/errors.hpp"
#include "bmm/sampling.hpp"
#include "oracles.hpp"

namespace bmm {
namespace {

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t d) {
  std::uniform_real_distribution<double> u(-1000.0, 1000.0);
  std::vector<double> v(d);
  for (auto& x : v) x = u(rng);
  return v;
}

TEST(SolveThreshold, TwoValues) {
  const std::vector<double> values{1, 2};
  const auto plan = solve_threshold(values, 1.0);
  const double oracle = static_cast<double>(oracle::threshold(values, 1.0));
  EXPECT_NEAR(oracle, 2.0, 1e-12);
  EXPECT_NEAR(plan.threshold, 2.0, 1e-9);
  EXPECT_NEAR(plan.probs[0], 1.0 / 3, 1e-9);
  EXPECT_NEAR(plan.probs[1], 2.0 / 3, 1e-9);
  EXPECT_FALSE(plan.exact_mode);
}

TEST(SolveThreshold, Symmetric) {
  const std::vector<double> values{3, 3, 3, 3};
  const auto plan = solve_threshold(values, 2.0);
  EXPECT_NEAR(plan.threshold, 9.0, 1e-9);
  for (double p : plan.probs) EXPECT_NEAR(p, 0.5, 1e-9);
}

TEST(SolveThreshold, ExactModeWhenSampleCoversNonzeros) {
  const std::vector<double> values{5, 0, 5};
  const auto plan = solve_threshold(values, 2.0);
  EXPECT_TRUE(plan.exact_mode);
  EXPECT_EQ(plan.threshold, 0.0);
  EXPECT_EQ(plan.probs, (std::vector<double>{1, 0, 1}));
  EXPECT_EQ(plan.target_n, 2.0);

  const auto larger = solve_threshold(values, 10.0);
  EXPECT_TRUE(larger.exact_mode);
}

TEST(SolveThreshold, Errors) {
  const std::vector<double> zeros{0, 0, 0};
  EXPECT_THROW(solve_threshold(zeros, 1.0), DataError);
  const std::vector<double> ok{1, 2};
  EXPECT_THROW(solve_threshold(ok, 0.0), ConfigError);
  EXPECT_THROW(solve_threshold(ok, -1.0), ConfigError);
  EXPECT_THROW(solve_threshold(ok, std::numeric_limits<double>::quiet_NaN()), ConfigError);
  const std::vector<double> bad{1, std::numeric_limits<double>::infinity()};
  EXPECT_THROW(solve_threshold(bad, 1.0), DataError);
  const std::vector<double> nan{std::numeric_limits<double>::quiet_NaN(), 1};
  EXPECT_THROW(solve_threshold(nan, 1.0), DataError);
  try {
    solve_threshold(zeros, 1.0);
  } catch (const DataError& e) {
    EXPECT_STREQ(e.what(), "no mass to sample");
  }
}

TEST(SolveThreshold, MatchesIndependentBisection) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto values = random_vector(rng, 50 + rep * 10);
    const double n = 0.3 * static_cast<double>(values.size());
    const auto plan = solve_threshold(values, n);
    const double c = static_cast<double>(oracle::threshold(values, n));
    EXPECT_NEAR(plan.threshold, c, 1e-7 * c);
  }
}

TEST(SolveThreshold, ZerosNeverSampled) {
  const std::vector<double> values{0, 4, 0, -2, 1, 0};
  const auto plan = solve_threshold(values, 1.5);
  for (std::size_t j = 0; j < values.size(); ++j) {
    EXPECT_EQ(plan.probs[j] == 0.0, values[j] == 0.0) << j;
  }
  EXPECT_NEAR(sum(plan.probs), 1.5, 1.5e-9);
}

TEST(SolveThreshold, ClampsVanishingProbabilities) {
  const std::vector<double> values{1e-200, 1.0, 1.0};
  const auto plan = solve_threshold(values, 1.0);
  EXPECT_EQ(plan.clamped, 1u);
  EXPECT_EQ(plan.probs[0], kMinProbability);
  EXPECT_GT(plan.probs[0], 0.0);
}

TEST(SolveThresholdProperty, SumMatchesTarget) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(1, 10000);
  std::uniform_real_distribution<double> frac(0.001, 0.999);
  for (int rep = 0; rep < 100; ++rep) {
    const auto values = random_vector(rng, dim(rng));
    const double n = frac(rng) * static_cast<double>(values.size());
    const auto plan = solve_threshold(values, n);
    ASSERT_LE(std::abs(sum(plan.probs) - n) / n, 1e-9) << "rep " << rep;
  }
}

TEST(SolveThresholdProperty, ScaleInvariance) {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const auto values = random_vector(rng, 200);
    for (double c : {-3.0, 1e-3, 17.5, 1e4}) {
      std::vector<double> scaled(values);
      for (auto& x : scaled) x *= c;
      const auto a = solve_threshold(values, 40.0);
      const auto b = solve_threshold(scaled, 40.0);
      EXPECT_NEAR(b.threshold / (a.threshold * c * c), 1.0, 1e-9);
      for (std::size_t j = 0; j < values.size(); ++j) EXPECT_NEAR(a.probs[j], b.probs[j], 1e-9);
    }
  }
}

TEST(SolveThresholdProperty, PermutationInvariance) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const auto values = random_vector(rng, 300);
    std::vector<std::size_t> perm(values.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> permuted(values.size());
    for (std::size_t j = 0; j < perm.size(); ++j) permuted[j] = values[perm[j]];
    const auto a = solve_threshold(values, 75.0);
    const auto b = solve_threshold(permuted, 75.0);
    EXPECT_NEAR(a.threshold, b.threshold, 1e-9 * a.threshold);
    for (std::size_t j = 0; j < perm.size(); ++j) EXPECT_NEAR(b.probs[j], a.probs[perm[j]], 1e-9);
  }
}

TEST(AssignProbabilities, Examples) {
  EXPECT_DOUBLE_EQ(inclusion_probability(1.0, 2.0), 1.0 / 3);
  EXPECT_EQ(inclusion_probability(0.0, 7.0), 0.0);
  EXPECT_EQ(inclusion_probability(10.0, 0.0), 1.0);
  EXPECT_EQ(inclusion_probability(0.0, 0.0), 0.0);
  const std::vector<double> values{1, 0, 10};
  EXPECT_EQ(assign_probabilities(values, 2.0), (std::vector<double>{1.0 / 3, 0.0, 100.0 / 102}));
  EXPECT_THROW(assign_probabilities(values, -1.0), ConfigError);
}

TEST(AssignProbabilities, AgreesWithDirectFormula) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> xs(-1e3, 1e3), cs(1e-3, 1e6);
  for (int i = 0; i < 10000; ++i) {
    const double x = xs(rng), c = cs(rng);
    EXPECT_NEAR(inclusion_probability(x, c), x * x / (x * x + c), 1e-15);
  }
}

TEST(AssignProbabilitiesProperty, Monotone) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.01, 100.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng), c2 = u(rng);
    if (a == b || c == c2) continue;
    // |x| larger => p larger at fixed C.
    EXPECT_EQ(inclusion_probability(a, c) < inclusion_probability(-b, c), a < b);
    // C larger => p smaller at fixed x.
    EXPECT_EQ(inclusion_probability(a, c) > inclusion_probability(a, c2), c < c2);
  }
}

TEST(PoissonSample, CertainAndImpossibleInclusion) {
  const auto v = SiteVector::dense(0, {1.0, 0.0, 3.0});
  SamplingPlan plan;
  plan.probs = {1.0, 0.0, 1.0};
  for (std::uint32_t t = 0; t < 1000; ++t) {
    const auto draw = poisson_sample(v, plan, 5, t);
    ASSERT_EQ(draw.included.size(), 2u);
    EXPECT_EQ(draw.included[0], (KeyedValue{0, 1.0}));
    EXPECT_EQ(draw.included[1], (KeyedValue{2, 3.0}));
    EXPECT_EQ(draw.draw_count, 2u);
  }
}

TEST(PoissonSample, InclusionFrequency) {
  const auto v = SiteVector::dense(0, {1.0, 2.0});
  const auto plan = plan_for_threshold(v.values(), 2.0);
  ASSERT_DOUBLE_EQ(plan.probs[0], 1.0 / 3);
  constexpr std::uint32_t kT = 100000;
  int hits = 0;
  for (std::uint32_t t = 0; t < kT; ++t) {
    const auto draw = poisson_sample(v, plan, 99, t);
    hits += std::count_if(draw.included.begin(), draw.included.end(),
                          [](const KeyedValue& e) { return e.key == 0; });
  }
  const double p = 1.0 / 3;
  EXPECT_NEAR(hits / double(kT), p, 4 * std::sqrt(p * (1 - p) / kT));
}

TEST(PoissonSample, RawValuesSubsetAndDeterminism) {
  std::mt19937_64 rng(16);
  const auto values = random_vector(rng, 500);
  const auto v = SiteVector::dense(3, values);
  const auto plan = solve_threshold(v.values(), 100.0);
  const auto a = poisson_sample(v, plan, 1234, 8);
  const auto b = poisson_sample(v, plan, 1234, 8);
  EXPECT_EQ(a.included, b.included);
  EXPECT_NE(a.included, poisson_sample(v, plan, 1234, 9).included);
  for (const auto& e : a.included) {
    ASSERT_LT(e.key, values.size());
    EXPECT_EQ(e.value, values[e.key]);
    EXPECT_GT(plan.probs[e.key], 0.0);
  }
  EXPECT_TRUE(std::is_sorted(a.included.begin(), a.included.end(),
                             [](auto& x, auto& y) { return x.key < y.key; }));
}

TEST(PoissonSample, RejectsMismatchedPlan) {
  const auto v = SiteVector::dense(0, {1.0, 2.0});
  SamplingPlan plan;
  plan.probs = {1.0};
  EXPECT_THROW(poisson_sample(v, plan, 0), ConfigError);
}

TEST(PointEstimate, Examples) {
  EXPECT_DOUBLE_EQ(minmax_point_estimate(2.0, 2.0 / 3), 3.0);
  EXPECT_EQ(minmax_point_estimate(-7.5, 1.0), -7.5);
  EXPECT_THROW(minmax_point_estimate(1.0, 0.0), DataError);
}

TEST(AnalyticMinMax, Examples) {
  EXPECT_NEAR(analytic_minmax_mse(2.0, 2.0 / 3), 2.0, 1e-12);
  EXPECT_EQ(analytic_minmax_mse(123.0, 1.0), 0.0);
  EXPECT_NEAR(analytic_minmax_mse(1.0, 1.0 / 3), 2.0, 1e-12);
  EXPECT_THROW(analytic_minmax_mse(1.0, 0.0), ConfigError);
}

TEST(AnalyticMinMaxProperty, ExpandedFormIdentity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> xs(-1e3, 1e3), ps(1e-6, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double x = xs(rng), p = ps(rng);
    const double expanded = p * (x / p - x) * (x / p - x) + (1 - p) * x * x;
    const double closed = analytic_minmax_mse(x, p);
    ASSERT_NEAR(expanded, closed, 1e-12 * std::max(closed, 1e-300)) << x << " " << p;
  }
}

TEST(AnalyticBMinMax, Examples) {
  const auto m = analytic_bminmax_moments(2.0, 2.0 / 3);
  EXPECT_NEAR(m.bias, -2.0 / 3, 1e-12);
  EXPECT_NEAR(m.variance, 8.0 / 9, 1e-12);
  EXPECT_NEAR(m.mse, 4.0 / 3, 1e-12);

  const auto exact = analytic_bminmax_moments(5.0, 1.0);
  EXPECT_EQ(exact.bias, 0.0);
  EXPECT_EQ(exact.variance, 0.0);
  EXPECT_EQ(exact.mse, 0.0);

  const auto never = analytic_bminmax_moments(3.0, 0.0);
  EXPECT_EQ(never.bias, -3.0);
  EXPECT_EQ(never.variance, 0.0);
  EXPECT_EQ(never.mse, 9.0);

  EXPECT_THROW(analytic_bminmax_moments(1.0, 1.5), ConfigError);
}

TEST(AnalyticBMinMaxProperty, BiasVarianceDecomposition) {
  std::mt19937_64 rng(18);
  std::uniform_real_distribution<double> xs(-1e3, 1e3), ps(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    const double x = xs(rng), p = ps(rng);
    const auto m = analytic_bminmax_moments(x, p);
    ASSERT_NEAR(m.mse, m.variance + m.bias * m.bias, 1e-12 * std::max(m.mse, 1e-300));
  }
}

TEST(AnalyticMoments, AgreeWithMonteCarlo) {
  const auto mc = oracle::simulate_element(2.0, 2.0 / 3, 1000000, 2024);
  EXPECT_NEAR(mc.minmax_mse / analytic_minmax_mse(2.0, 2.0 / 3), 1.0, 0.02);
  const auto m = analytic_bminmax_moments(2.0, 2.0 / 3);
  EXPECT_NEAR(mc.bminmax_mse / m.mse, 1.0, 0.02);
  EXPECT_NEAR(mc.bminmax_var / m.variance, 1.0, 0.02);
  EXPECT_NEAR((mc.bminmax_mean - 2.0) / m.bias, 1.0, 0.02);
}

TEST(MseGap, Examples) {
  EXPECT_NEAR(mse_gap(2.0, 2.0 / 3), 2.0 / 3, 1e-12);
  EXPECT_NEAR(mse_gap(2.0, 2.0 / 3),
              analytic_minmax_mse(2.0, 2.0 / 3) - analytic_bminmax_moments(2.0, 2.0 / 3).mse, 1e-12);
  EXPECT_NEAR(mse_gap(1.0, 0.5), 0.5, 1e-15);
  EXPECT_LT(mse_gap(1.0, 1.0 - 1e-9), 1e-17);
  EXPECT_GT(mse_gap(1.0, 1e-9), 1e8);
  EXPECT_THROW(mse_gap(0.0, 0.5), ConfigError);
  EXPECT_THROW(mse_gap(1.0, 0.0), ConfigError);
  EXPECT_THROW(mse_gap(1.0, 1.0), ConfigError);
}

TEST(MseGapProperty, PositiveAndClosedForm) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> xs(-1e3, 1e3), ps(0.0, 1.0);
  for (int i = 0; i < 100000; ++i) {
    double x = xs(rng), p = ps(rng);
    if (x == 0.0 || p == 0.0) continue;
    const double gap = mse_gap(x, p);
    ASSERT_GT(gap, 0.0);
    ASSERT_NEAR(gap, x * x * (p - 1) * (p - 1) / p, 1e-12 * gap);
  }
}

TEST(Unbiasedness, EmpiricalMeans) {
  const auto v = SiteVector::dense(0, {2.0});
  const auto plan = plan_for_threshold(v.values(), 2.0);
  const double p = plan.probs[0];
  constexpr std::uint32_t kT = 100000;
  double sum_mm = 0.0, sum_raw = 0.0;
  for (std::uint32_t t = 0; t < kT; ++t) {
    const auto draw = poisson_sample(v, plan, 77, t);
    for (const auto& e : draw.included) {
      sum_mm += minmax_point_estimate(e.value, p);
      sum_raw += e.value;
    }
  }
  const double var_mm = analytic_minmax_mse(2.0, p);
  EXPECT_NEAR(sum_mm / kT, 2.0, 4 * std::sqrt(var_mm / kT));
  const auto m = analytic_bminmax_moments(2.0, p);
  EXPECT_NEAR(sum_raw / kT - 2.0, m.bias, 4 * std::sqrt(m.variance / kT));
}

TEST(SampleSizeForRatio, Basics) {
  EXPECT_EQ(sample_size_for_ratio(10000, 4.0), 2500.0);
  EXPECT_EQ(sample_size_for_ratio(7, 1.0), 7.0);
  EXPECT_THROW(sample_size_for_ratio(10, 0.5), ConfigError);
  EXPECT_THROW(sample_size_for_ratio(0, 2.0), ConfigError);
}

TEST(SiteVector, Invariants) {
  EXPECT_THROW(SiteVector(0, {1, 1}, {1.0, 2.0}, 2), DataError);
  EXPECT_THROW(SiteVector(0, {2, 1}, {1.0, 2.0}, 2), DataError);
  EXPECT_THROW(SiteVector(0, {0}, {1.0, 2.0}, 2), DataError);
  EXPECT_THROW(SiteVector(0, {0, 1}, {1.0, 2.0}, 1), DataError);
  EXPECT_THROW(SiteVector::dense(0, {std::numeric_limits<double>::quiet_NaN()}), DataError);
  const SiteVector sparse(1, {3, 90}, {1.0, -2.0}, 100);
  EXPECT_EQ(sparse.dimension(), 100u);
  EXPECT_EQ(sparse.size(), 2u);
}

}  // namespace
}  // namespace bmm
