// bmmx: MinMax / B-MinMax sampling, aggregation and Monte Carlo sweeps.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bmm/aggregation.hpp"
#include "bmm/errors.hpp"
#include "bmm/experiment.hpp"
#include "bmm/sampling.hpp"
#include "bmm/vector_io.hpp"
#include "bmm/wire.hpp"
#include "bmm/zipf.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw bmm::DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw bmm::DataError("failed writing " + path.string());
}

struct GenArgs {
  std::string dist = "zipf";
  double exponent = 1.0;
  std::uint64_t support = 1'000'000;
  std::uint64_t dim = 10000;
  std::uint64_t seed = 42;
  std::uint32_t site = 0;
  fs::path out;
};

int run_gen(const GenArgs& a) {
  if (a.dist != "zipf") throw bmm::ConfigError("unsupported distribution '" + a.dist + "'");
  const auto v = bmm::gen_zipf(a.dim, a.exponent, a.support, a.seed, a.site);
  bmm::write_values(a.out, v.values());
  std::cout << "wrote " << v.size() << " values to " << a.out.string() << "\n";
  return 0;
}

struct SampleArgs {
  fs::path input;
  double ratio = 4.0;
  fs::path out;
  bool unbiased = false;
  std::uint32_t site = 0;
  std::uint64_t seed = 42;
  std::uint32_t trial = 0;
};

int run_sample(const SampleArgs& a) {
  auto values = bmm::read_values(a.input);
  const auto vector = bmm::SiteVector::dense(a.site, std::move(values));
  const double n = bmm::sample_size_for_ratio(vector.size(), a.ratio);
  const auto plan = bmm::solve_threshold(vector.values(), n);
  const auto draw = bmm::poisson_sample(vector, plan, a.seed, a.trial);
  const auto payload = bmm::prepare_payload(vector, plan, draw, a.unbiased);
  bmm::wire::write_payload_file(a.out, payload);

  const auto ratios = bmm::wire::effective_compression(payload);
  std::printf("site=%u d=%zu threshold=%.17g sampled=%zu expected=%.6g\n", a.site, vector.size(),
              plan.threshold, payload.entries.size(), plan.target_n);
  std::printf("nominal_ratio=%.6g byte_ratio=%.6g bytes=%zu%s\n", ratios.nominal, ratios.byte_ratio,
              bmm::wire::encoded_size(payload.entries.size()),
              plan.exact_mode ? " exact_mode" : "");
  if (plan.clamped > 0) std::printf("clamped_probabilities=%zu\n", plan.clamped);
  return 0;
}

struct AggregateArgs {
  std::vector<fs::path> payloads;
  std::string mode;
  fs::path out;
};

int run_aggregate(const AggregateArgs& a) {
  std::vector<bmm::SitePayload> payloads;
  for (const auto& p : a.payloads) payloads.push_back(bmm::wire::read_payload_file(p));

  std::string mode = a.mode;
  if (mode.empty()) {
    const bool all_unbiased = std::all_of(payloads.begin(), payloads.end(),
                                          [](const auto& p) { return p.unbiased_requested; });
    mode = all_unbiased ? "minmax" : "adaptive";
  }

  std::vector<bmm::SiteSummary> summaries;
  for (const auto& p : payloads) summaries.push_back(p.summary);
  const auto est = bmm::estimate_aggregate_mse(summaries);

  bmm::AggregateEstimate result;
  if (mode == "adaptive") {
    result = bmm::adaptive_aggregate(payloads);
  } else if (mode == "minmax" || mode == "bminmax") {
    result.mode = mode == "minmax" ? bmm::EstimatorMode::kMinMax : bmm::EstimatorMode::kBMinMax;
    result.estimates = bmm::aggregate_fixed(payloads, result.mode);
    result.est_mse_bminmax = est.bminmax;
    result.est_mse_minmax = est.minmax;
    result.sites_merged = payloads.size();
  } else {
    throw bmm::ConfigError("unknown mode '" + mode + "'");
  }

  std::string csv = "key,estimate\n";
  char buf[64];
  for (const auto& [key, value] : result.estimates) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g\n", static_cast<unsigned long long>(key), value);
    csv += buf;
  }
  write_text(a.out, csv);
  std::printf("mode=%s est_mse_bminmax=%.9g est_mse_minmax=%.9g sites=%zu keys=%zu\n",
              std::string(bmm::to_string(result.mode)).c_str(), result.est_mse_bminmax,
              result.est_mse_minmax, result.sites_merged, result.estimates.size());
  return 0;
}

struct ExperimentArgs {
  bmm::ExperimentConfig config;
  std::string dist;
  std::uint64_t support = 1'000'000;
  fs::path input;
  std::string sweep;
  std::vector<std::string> estimators;
  fs::path out;
  bool timing = false;
  bool dim_set = false;
};

// "zipf:S" or "zipf:S:N"
bmm::ZipfSource parse_dist(const std::string& spec, std::uint64_t default_support) {
  bmm::ZipfSource z;
  z.support = default_support;
  if (spec.rfind("zipf", 0) != 0) throw bmm::ConfigError("unsupported distribution '" + spec + "'");
  std::string rest = spec.substr(4);
  if (rest.empty()) return z;
  if (rest[0] != ':') throw bmm::ConfigError("distribution must look like zipf:1");
  rest = rest.substr(1);
  try {
    const auto colon = rest.find(':');
    z.exponent = std::stod(rest.substr(0, colon));
    if (colon != std::string::npos) z.support = std::stoull(rest.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw bmm::ConfigError("cannot parse distribution '" + spec + "'");
  }
  return z;
}

int run_experiment_cmd(ExperimentArgs a) {
  auto& cfg = a.config;
  if (!a.input.empty() && !a.dist.empty()) {
    throw bmm::ConfigError("--dist and --input are mutually exclusive");
  }
  if (!a.input.empty()) {
    cfg.source = bmm::FileSource{a.input};
    if (!a.dim_set) cfg.dimension = 0;
  } else {
    cfg.source = parse_dist(a.dist.empty() ? "zipf:1" : a.dist, a.support);
  }
  if (!a.estimators.empty()) {
    cfg.estimators.clear();
    for (const auto& e : a.estimators) cfg.estimators.push_back(bmm::parse_estimator(e));
  }
  const bmm::SweepAxis axis = a.sweep.empty()
      ? bmm::SweepAxis{bmm::SweepAxis::Kind::kCompressionRatio, {cfg.compression_ratio}}
      : bmm::parse_sweep(a.sweep);

  const auto result = bmm::sweep(cfg, axis, a.timing);
  if (a.out.empty()) {
    std::cout << result.csv;
  } else {
    write_text(a.out, result.csv);
    fs::path dat = a.out;
    dat.replace_extension(".dat");
    write_text(dat, result.dat);
    std::cerr << "wrote " << result.rows.size() << " rows to " << a.out.string() << " and "
              << dat.string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MinMax / B-MinMax Poisson sampling and distributed aggregation"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic vector");
  gen_cmd->add_option("--dist", gen.dist, "Distribution (zipf)");
  gen_cmd->add_option("--s", gen.exponent, "Zipf exponent");
  gen_cmd->add_option("--support", gen.support, "Zipf support size N");
  gen_cmd->add_option("--dim", gen.dim, "Number of values");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--site", gen.site, "Site index used for seeding");
  gen_cmd->add_option("--out", gen.out, "Output file (.csv for text, raw f64 otherwise)")->required();

  SampleArgs sample;
  auto* sample_cmd = app.add_subcommand("sample", "Sample a vector into a .bmmx payload");
  sample_cmd->add_option("--input", sample.input, "Vector file (CSV or raw f64)")->required();
  sample_cmd->add_option("--ratio", sample.ratio, "Compression ratio d/n");
  sample_cmd->add_option("--out", sample.out, "Payload file")->required();
  sample_cmd->add_flag("--unbiased", sample.unbiased, "Request unbiased (MinMax) decoding");
  sample_cmd->add_option("--site", sample.site, "Site id");
  sample_cmd->add_option("--seed", sample.seed, "Seed");
  sample_cmd->add_option("--trial", sample.trial, "Trial index");

  AggregateArgs agg;
  auto* agg_cmd = app.add_subcommand("aggregate", "Merge site payloads");
  agg_cmd->add_option("payloads", agg.payloads, "Payload files")->required();
  agg_cmd->add_option("--mode", agg.mode, "adaptive|minmax|bminmax")
      ->check(CLI::IsMember({"adaptive", "minmax", "bminmax"}));
  agg_cmd->add_option("--out", agg.out, "Estimates CSV")->required();

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo MSE experiment or sweep");
  exp_cmd->add_option("--sites", exp.config.sites, "Number of sites k");
  auto* dim_opt = exp_cmd->add_option("--dim", exp.config.dimension, "Elements per site");
  exp_cmd->add_option("--ratio", exp.config.compression_ratio, "Compression ratio d/n");
  exp_cmd->add_option("--trials", exp.config.trials, "Monte Carlo trials");
  exp_cmd->add_option("--seed", exp.config.seed, "Seed");
  exp_cmd->add_option("--dist", exp.dist, "zipf:S or zipf:S:N");
  exp_cmd->add_option("--support", exp.support, "Zipf support size N");
  exp_cmd->add_option("--input", exp.input, "Vector file split into contiguous site chunks");
  exp_cmd->add_option("--sweep", exp.sweep, "ratio=2,4,6 or sites=1..50");
  exp_cmd->add_option("--overlap", exp.config.key_overlap, "Fraction of keys shared by all sites");
  exp_cmd->add_option("--estimators", exp.estimators, "Subset of minmax,bminmax,adaptive")
      ->delimiter(',');
  exp_cmd->add_option("--threads", exp.config.threads, "Worker threads (capped by BMMX_THREADS)");
  exp_cmd->add_flag("--timing", exp.timing, "Record wall time in the CSV");
  exp_cmd->add_option("--out", exp.out, "Results CSV (a .dat file is written alongside)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*sample_cmd) return run_sample(sample);
    if (*agg_cmd) return run_aggregate(agg);
    if (*exp_cmd) {
      exp.dim_set = dim_opt->count() > 0;
      return run_experiment_cmd(exp);
    }
  } catch (const bmm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const bmm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
