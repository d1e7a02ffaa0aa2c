#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bmm/types.hpp"

namespace bmm {

enum class Estimator { kMinMax = 0, kBMinMax = 1, kAdaptive = 2 };
inline constexpr std::array<Estimator, 3> kAllEstimators = {
    Estimator::kMinMax, Estimator::kBMinMax, Estimator::kAdaptive};

std::string_view to_string(Estimator e) noexcept;
Estimator parse_estimator(std::string_view name);

struct ZipfSource {
  double exponent = 1.0;
  std::uint64_t support = 1'000'000;
};

struct FileSource {
  std::filesystem::path path;
};

using DataSource = std::variant<ZipfSource, FileSource>;

std::string describe(const DataSource& source);

struct ExperimentConfig {
  std::uint32_t sites = 4;
  // Local elements per site. For a file source, 0 means "the whole chunk".
  std::uint64_t dimension = 10000;
  double compression_ratio = 4.0;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 42;
  DataSource source = ZipfSource{};
  std::vector<Estimator> estimators{kAllEstimators.begin(), kAllEstimators.end()};
  // Fraction of each site's keys shared by all sites.
  double key_overlap = 1.0;
  // Worker threads; 0 picks BMMX_THREADS or the hardware concurrency.
  unsigned threads = 0;

  // Throws ConfigError.
  void validate() const;
};

// Thread count actually used: `requested` (or the hardware concurrency when
// 0), capped by the BMMX_THREADS environment variable.
unsigned resolve_threads(unsigned requested);

struct TrialOptions {
  double compression_ratio = 4.0;
  std::uint64_t trials = 1000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

// Per-key statistics of the estimation error over all trials, aligned with
// TrialReport::keys.
struct KeyStats {
  std::vector<double> mean_error;
  std::vector<double> mse;
  std::vector<double> mse_stderr;
};

struct TrialReport {
  std::vector<std::uint64_t> keys;
  std::vector<double> truth;
  std::array<KeyStats, kAllEstimators.size()> per_estimator;
  std::uint64_t trials = 0;
  std::uint64_t adaptive_bminmax_trials = 0;
  double wall_time_ms = 0.0;

  const KeyStats& stats(Estimator e) const { return per_estimator[static_cast<int>(e)]; }
};

// Monte Carlo over fixed site data. Every trial samples each site with
// n = size / ratio, round-trips the payload through the wire format, and
// aggregates it with all three estimators on the same draws. Results do not
// depend on the thread count.
TrialReport run_trials(std::span<const SiteVector> sites, const TrialOptions& options);

// Site data for a config: Zipf draws per (seed, site), or contiguous chunks
// of the input file.
std::vector<SiteVector> build_sites(const ExperimentConfig& config);

struct ResultRow {
  std::uint32_t sites = 0;
  std::uint64_t dimension = 0;
  double compression_ratio = 0.0;
  std::string source;
  Estimator estimator = Estimator::kAdaptive;
  double mean_mse = 0.0;
  double max_mse = 0.0;
  double mean_abs_bias = 0.0;
  // Fraction of trials in which the adaptive rule chose B-MinMax.
  double adaptive_mode_fraction = 0.0;
  double wall_time_ms = 0.0;
};

ResultRow summarize(const TrialReport& report, Estimator estimator);

// One row per requested estimator, in MinMax, BMinMax, Adaptive order.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

struct SweepAxis {
  enum class Kind { kCompressionRatio, kSites };
  Kind kind = Kind::kCompressionRatio;
  std::vector<double> values;
};

// "ratio=2,4,6" or "sites=1..50" (lists and a..b ranges may be mixed).
SweepAxis parse_sweep(std::string_view spec);

struct SweepOutput {
  std::vector<ResultRow> rows;
  std::string csv;
  // gnuplot data: axis value followed by mean_mse per estimator.
  std::string dat;
};

inline constexpr std::string_view kCsvHeader =
    "axis,estimator,mean_mse,max_mse,mean_abs_bias,adaptive_bminmax_fraction,wall_ms";

// Runs one experiment per axis value. wall_ms is written only when
// record_timing is set so that equal seeds give byte-identical CSV.
SweepOutput sweep(const ExperimentConfig& config, const SweepAxis& axis,
                  bool record_timing = false);

}  // namespace bmm
