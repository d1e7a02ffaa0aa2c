#include "bmm/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <unordered_map>

#include "bmm/aggregation.hpp"
#include "bmm/errors.hpp"
#include "bmm/sampling.hpp"
#include "bmm/vector_io.hpp"
#include "bmm/wire.hpp"
#include "bmm/zipf.hpp"
#include "experiment_internal.hpp"

namespace bmm {
namespace {

constexpr std::uint64_t kBlockTrials = 16;
constexpr std::size_t kNumEstimators = kAllEstimators.size();

// Maps keys to dense slots; direct indexing when the union is 0..K-1.
class SlotIndex {
 public:
  explicit SlotIndex(const std::vector<std::uint64_t>& sorted_keys)
      : contiguous_(sorted_keys.empty() || sorted_keys.back() + 1 == sorted_keys.size()) {
    if (!contiguous_) {
      map_.reserve(sorted_keys.size());
      for (std::size_t s = 0; s < sorted_keys.size(); ++s) map_.emplace(sorted_keys[s], s);
    }
  }

  std::size_t operator()(std::uint64_t key) const {
    return contiguous_ ? static_cast<std::size_t>(key) : map_.at(key);
  }

 private:
  bool contiguous_;
  std::unordered_map<std::uint64_t, std::size_t> map_;
};

// Error moments for one block of trials.
struct Moments3 {
  std::array<std::vector<double>, kNumEstimators> e1, e2, e4;
  std::uint64_t bminmax_trials = 0;

  explicit Moments3(std::size_t slots) {
    for (std::size_t e = 0; e < kNumEstimators; ++e) {
      e1[e].assign(slots, 0.0);
      e2[e].assign(slots, 0.0);
      e4[e].assign(slots, 0.0);
    }
  }

  void add(const Moments3& other) {
    for (std::size_t e = 0; e < kNumEstimators; ++e) {
      for (std::size_t s = 0; s < e1[e].size(); ++s) {
        e1[e][s] += other.e1[e][s];
        e2[e][s] += other.e2[e][s];
        e4[e][s] += other.e4[e][s];
      }
    }
    bminmax_trials += other.bminmax_trials;
  }
};

struct TrialContext {
  std::span<const SiteVector> sites;
  std::vector<SamplingPlan> plans;
  std::vector<SitePayload> templates;
  std::vector<double> truth;
  SlotIndex slots;
  std::uint64_t seed;
};

template <typename Error>
[[noreturn]] void rethrow_with_trial(const Error& e, std::uint64_t trial) {
  throw Error("trial " + std::to_string(trial) + ": " + e.what());
}

void run_block(const TrialContext& ctx, std::uint64_t first, std::uint64_t last, Moments3& acc) {
  const std::size_t n_slots = ctx.truth.size();
  std::vector<double> sum_b(n_slots, 0.0);
  std::vector<double> sum_mm(n_slots, 0.0);
  std::vector<SiteSummary> summaries(ctx.sites.size());

  for (std::uint64_t t = first; t < last; ++t) {
    try {
      for (std::size_t i = 0; i < ctx.sites.size(); ++i) {
        SampleDraw draw = poisson_sample(ctx.sites[i], ctx.plans[i], ctx.seed,
                                         static_cast<std::uint32_t>(t));
        SitePayload payload = ctx.templates[i];
        payload.entries = std::move(draw.included);
        const SitePayload received = wire::decode_payload(wire::encode_payload(payload));
        summaries[i] = received.summary;
        for (const auto& e : received.entries) {
          const std::size_t s = ctx.slots(e.key);
          sum_b[s] += decode_value(e.value, received.threshold, EstimatorMode::kBMinMax);
          sum_mm[s] += decode_value(e.value, received.threshold, EstimatorMode::kMinMax);
        }
      }
      const EstimatorMode mode = select_mode(estimate_aggregate_mse(summaries));
      if (mode == EstimatorMode::kBMinMax) ++acc.bminmax_trials;

      for (std::size_t s = 0; s < n_slots; ++s) {
        const double err_mm = sum_mm[s] - ctx.truth[s];
        const double err_b = sum_b[s] - ctx.truth[s];
        const double errs[kNumEstimators] = {
            err_mm, err_b, mode == EstimatorMode::kBMinMax ? err_b : err_mm};
        for (std::size_t e = 0; e < kNumEstimators; ++e) {
          const double sq = errs[e] * errs[e];
          acc.e1[e][s] += errs[e];
          acc.e2[e][s] += sq;
          acc.e4[e][s] += sq * sq;
        }
        sum_b[s] = 0.0;
        sum_mm[s] = 0.0;
      }
    } catch (const ConfigError& e) {
      rethrow_with_trial(e, t);
    } catch (const DataError& e) {
      rethrow_with_trial(e, t);
    }
  }
}

}  // namespace

std::string_view to_string(Estimator e) noexcept {
  switch (e) {
    case Estimator::kMinMax: return "minmax";
    case Estimator::kBMinMax: return "bminmax";
    case Estimator::kAdaptive: return "adaptive";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view name) {
  for (Estimator e : kAllEstimators) {
    if (to_string(e) == name) return e;
  }
  throw ConfigError("unknown estimator '" + std::string(name) + "'");
}

std::string describe(const DataSource& source) {
  if (const auto* z = std::get_if<ZipfSource>(&source)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "zipf:%g:%llu", z->exponent,
                  static_cast<unsigned long long>(z->support));
    return buf;
  }
  return "file:" + std::get<FileSource>(source).path.filename().string();
}

void ExperimentConfig::validate() const {
  if (sites == 0) throw ConfigError("site count must be positive");
  if (trials == 0) throw ConfigError("trial count must be positive");
  if (trials > 0xFFFFFFFFull) throw ConfigError("trial count exceeds 2^32 - 1");
  if (!(compression_ratio >= 1.0) || !std::isfinite(compression_ratio)) {
    throw ConfigError("compression ratio must be >= 1");
  }
  if (!(key_overlap >= 0.0 && key_overlap <= 1.0)) {
    throw ConfigError("key overlap must lie in [0, 1]");
  }
  if (estimators.empty()) throw ConfigError("no estimators requested");
  if (const auto* z = std::get_if<ZipfSource>(&source)) {
    if (dimension == 0) throw ConfigError("dimension must be positive");
    if (!(z->exponent > 0.0)) throw ConfigError("zipf exponent must be positive");
    if (z->support < 2) throw ConfigError("zipf support must be at least 2");
  }
}

unsigned resolve_threads(unsigned requested) {
  unsigned threads = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BMMX_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) {
      threads = std::min<unsigned>(threads, static_cast<unsigned>(std::min(cap, 4096ul)));
    }
  }
  return threads;
}

TrialReport run_trials(std::span<const SiteVector> sites, const TrialOptions& options) {
  if (sites.empty()) throw ConfigError("no sites");
  if (options.trials == 0) throw ConfigError("trial count must be positive");
  if (options.trials > 0xFFFFFFFFull) throw ConfigError("trial count exceeds 2^32 - 1");
  const auto started = std::chrono::steady_clock::now();

  TrialReport report;
  report.trials = options.trials;
  for (const auto& site : sites) {
    report.keys.insert(report.keys.end(), site.keys().begin(), site.keys().end());
  }
  std::sort(report.keys.begin(), report.keys.end());
  report.keys.erase(std::unique(report.keys.begin(), report.keys.end()), report.keys.end());

  TrialContext ctx{sites, {}, {}, std::vector<double>(report.keys.size(), 0.0),
                   SlotIndex(report.keys), options.seed};
  for (const auto& site : sites) {
    const double n = sample_size_for_ratio(site.size(), options.compression_ratio);
    ctx.plans.push_back(solve_threshold(site.values(), n));
    ctx.templates.push_back(prepare_payload(site, ctx.plans.back(), SampleDraw{}));
    for (std::size_t j = 0; j < site.size(); ++j) {
      ctx.truth[ctx.slots(site.keys()[j])] += site.values()[j];
    }
  }

  const std::uint64_t blocks = (options.trials + kBlockTrials - 1) / kBlockTrials;
  const unsigned threads = static_cast<unsigned>(
      std::min<std::uint64_t>(resolve_threads(options.threads), blocks));
  Moments3 total(ctx.truth.size());

  // Blocks run in waves of `threads`; each wave is merged in block order so
  // the floating-point sums are independent of the thread count.
  for (std::uint64_t wave = 0; wave < blocks; wave += threads) {
    const std::uint64_t in_wave = std::min<std::uint64_t>(threads, blocks - wave);
    std::vector<Moments3> partial(in_wave, Moments3(ctx.truth.size()));
    std::vector<std::exception_ptr> errors(in_wave);
    auto work = [&](std::uint64_t b) {
      try {
        const std::uint64_t first = (wave + b) * kBlockTrials;
        run_block(ctx, first, std::min(first + kBlockTrials, options.trials), partial[b]);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    };
    if (in_wave == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::uint64_t b = 0; b < in_wave; ++b) pool.emplace_back(work, b);
    }
    for (std::uint64_t b = 0; b < in_wave; ++b) {
      if (errors[b]) std::rethrow_exception(errors[b]);
      total.add(partial[b]);
    }
  }

  const auto trials = static_cast<double>(options.trials);
  for (std::size_t e = 0; e < kNumEstimators; ++e) {
    KeyStats& ks = report.per_estimator[e];
    const std::size_t n = ctx.truth.size();
    ks.mean_error.resize(n);
    ks.mse.resize(n);
    ks.mse_stderr.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      ks.mean_error[s] = total.e1[e][s] / trials;
      ks.mse[s] = total.e2[e][s] / trials;
      const double var = total.e4[e][s] / trials - ks.mse[s] * ks.mse[s];
      ks.mse_stderr[s] = std::sqrt(std::max(var, 0.0) / trials);
    }
  }
  report.adaptive_bminmax_trials = total.bminmax_trials;
  report.truth = std::move(ctx.truth);
  report.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return report;
}

ResultRow summarize(const TrialReport& report, Estimator estimator) {
  const KeyStats& ks = report.stats(estimator);
  ResultRow row;
  row.estimator = estimator;
  const auto keys = static_cast<double>(ks.mse.size());
  double sum_mse = 0.0;
  double sum_bias = 0.0;
  for (std::size_t s = 0; s < ks.mse.size(); ++s) {
    sum_mse += ks.mse[s];
    sum_bias += std::abs(ks.mean_error[s]);
    row.max_mse = std::max(row.max_mse, ks.mse[s]);
  }
  row.mean_mse = sum_mse / keys;
  row.mean_abs_bias = sum_bias / keys;
  row.adaptive_mode_fraction =
      static_cast<double>(report.adaptive_bminmax_trials) / static_cast<double>(report.trials);
  row.wall_time_ms = report.wall_time_ms;
  return row;
}

namespace detail {

SiteFactory::SiteFactory(const ExperimentConfig& config) : config_(config) {
  if (const auto* z = std::get_if<ZipfSource>(&config.source)) {
    zipf_ = std::make_shared<ZipfTable>(z->exponent, z->support);
  } else {
    file_values_ = read_values(std::get<FileSource>(config.source).path);
  }
}

std::vector<SiteVector> SiteFactory::build(std::uint32_t sites) const {
  if (sites == 0) throw ConfigError("site count must be positive");
  if (zipf_) {
    const std::uint64_t d = config_.dimension;
    const std::uint64_t space = key_space_size(sites, d, config_.key_overlap);
    std::vector<SiteVector> out;
    out.reserve(sites);
    for (std::uint32_t i = 0; i < sites; ++i) {
      SiteVector dense = gen_zipf(d, *zipf_, config_.seed, i);
      const auto values = dense.values();
      out.emplace_back(i, site_keys(i, d, config_.key_overlap),
                       std::vector<double>(values.begin(), values.end()), space);
    }
    return out;
  }
  std::uint64_t chunk = file_values_.size() / sites;
  if (config_.dimension != 0) chunk = std::min(chunk, config_.dimension);
  if (chunk == 0) {
    throw DataError("input holds " + std::to_string(file_values_.size()) +
                    " values, too few for " + std::to_string(sites) + " sites");
  }
  std::vector<double> trimmed;
  trimmed.reserve(chunk * sites);
  const std::uint64_t stride = file_values_.size() / sites;
  for (std::uint32_t i = 0; i < sites; ++i) {
    const auto first = file_values_.begin() + static_cast<std::ptrdiff_t>(i * stride);
    trimmed.insert(trimmed.end(), first, first + static_cast<std::ptrdiff_t>(chunk));
  }
  return split_sites(trimmed, sites, config_.key_overlap);
}

std::vector<ResultRow> run_with(const ExperimentConfig& config, const SiteFactory& factory) {
  config.validate();
  const auto sites = factory.build(config.sites);
  const TrialReport report = run_trials(
      sites, {config.compression_ratio, config.trials, config.seed, config.threads});
  std::vector<ResultRow> rows;
  for (Estimator e : kAllEstimators) {
    if (std::find(config.estimators.begin(), config.estimators.end(), e) ==
        config.estimators.end()) {
      continue;
    }
    ResultRow row = summarize(report, e);
    row.sites = config.sites;
    row.dimension = sites.front().size();
    row.compression_ratio = config.compression_ratio;
    row.source = describe(config.source);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

std::vector<SiteVector> build_sites(const ExperimentConfig& config) {
  config.validate();
  return detail::SiteFactory(config).build(config.sites);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  return detail::run_with(config, detail::SiteFactory(config));
}

}  // namespace bmm
