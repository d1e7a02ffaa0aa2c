#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "bmm/errors.hpp"
#include "bmm/experiment.hpp"
#include "experiment_internal.hpp"

namespace bmm {
namespace {

double parse_number(std::string_view text, std::string_view spec) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError("bad sweep value '" + std::string(text) + "' in '" + std::string(spec) + "'");
  }
  return v;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

SweepAxis parse_sweep(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("sweep must look like ratio=2,4 or sites=1..50");
  }
  SweepAxis axis;
  const auto name = spec.substr(0, eq);
  if (name == "ratio") {
    axis.kind = SweepAxis::Kind::kCompressionRatio;
  } else if (name == "sites") {
    axis.kind = SweepAxis::Kind::kSites;
  } else {
    throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
  }

  std::string_view rest = spec.substr(eq + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const double lo = parse_number(item.substr(0, dots), spec);
      const double hi = parse_number(item.substr(dots + 2), spec);
      if (lo != std::floor(lo) || hi != std::floor(hi) || hi < lo) {
        throw ConfigError("sweep range '" + std::string(item) + "' must be integral and ascending");
      }
      for (double v = lo; v <= hi; v += 1.0) axis.values.push_back(v);
    } else {
      axis.values.push_back(parse_number(item, spec));
    }
  }
  if (axis.values.empty()) throw ConfigError("empty sweep");
  if (axis.kind == SweepAxis::Kind::kSites) {
    for (double v : axis.values) {
      if (v < 1.0 || v != std::floor(v) || v > 65535.0) {
        throw ConfigError("site counts must be integers in [1, 65535]");
      }
    }
  }
  return axis;
}

SweepOutput sweep(const ExperimentConfig& config, const SweepAxis& axis, bool record_timing) {
  if (axis.values.empty()) throw ConfigError("empty sweep");
  config.validate();
  const detail::SiteFactory factory(config);

  SweepOutput out;
  out.csv.append(kCsvHeader).append("\n");
  out.dat = "# " + std::string(axis.kind == SweepAxis::Kind::kSites ? "sites" : "ratio");
  for (Estimator e : kAllEstimators) {
    if (std::find(config.estimators.begin(), config.estimators.end(), e) != config.estimators.end()) {
      out.dat.append(" ").append(to_string(e));
    }
  }
  out.dat.append("\n");

  for (double value : axis.values) {
    ExperimentConfig point = config;
    if (axis.kind == SweepAxis::Kind::kSites) {
      point.sites = static_cast<std::uint32_t>(value);
    } else {
      point.compression_ratio = value;
    }
    const auto rows = detail::run_with(point, factory);
    out.dat.append(format_number(value));
    for (const auto& row : rows) {
      out.csv.append(format_number(value)).append(",");
      out.csv.append(to_string(row.estimator)).append(",");
      out.csv.append(format_number(row.mean_mse)).append(",");
      out.csv.append(format_number(row.max_mse)).append(",");
      out.csv.append(format_number(row.mean_abs_bias)).append(",");
      out.csv.append(format_number(row.adaptive_mode_fraction)).append(",");
      out.csv.append(record_timing ? format_number(row.wall_time_ms) : "0").append("\n");
      out.dat.append(" ").append(format_number(row.mean_mse));
      out.rows.push_back(row);
    }
    out.dat.append("\n");
  }
  return out;
}

}  // namespace bmm
