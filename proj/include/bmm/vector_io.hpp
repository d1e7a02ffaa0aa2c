#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bmm/types.hpp"

namespace bmm {

enum class VectorFormat {
  kAuto,  // CSV if the file is text, raw f64 otherwise
  kCsv,   // one value per line
  kRaw,   // little-endian IEEE-754 doubles
};

// Reads a flat vector. Errors name the offending line (CSV) or byte offset
// (raw) and are thrown as DataError.
std::vector<double> read_values(const std::filesystem::path& path,
                                VectorFormat format = VectorFormat::kAuto);

SiteVector load_vector(const std::filesystem::path& path,
                       VectorFormat format = VectorFormat::kAuto);

// Writes CSV for .csv/.txt paths and raw doubles otherwise.
void write_values(const std::filesystem::path& path, std::span<const double> values);

// Splits a flat vector into `sites` contiguous chunks of equal length (the
// remainder is dropped) and lays them out on a shared key space.
std::vector<SiteVector> split_sites(std::span<const double> values, std::uint32_t sites,
                                    double key_overlap = 1.0);

// Key layout for multi-site runs: the first round(overlap * d) keys are shared
// by every site, the rest are unique to each site.
std::vector<std::uint64_t> site_keys(std::uint32_t site, std::uint64_t dimension,
                                     double key_overlap);

// Size of the union key space produced by site_keys.
std::uint64_t key_space_size(std::uint32_t sites, std::uint64_t dimension, double key_overlap);

}  // namespace bmm
