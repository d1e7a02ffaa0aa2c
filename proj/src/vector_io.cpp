#include "bmm/vector_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>

#include "bmm/errors.hpp"

namespace bmm {
namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool looks_like_text(std::string_view data) {
  for (unsigned char c : data) {
    if (!(c == '\n' || c == '\r' || c == '\t' || (c >= 0x20 && c < 0x7f))) return false;
  }
  return true;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> parse_csv(std::string_view data, const std::filesystem::path& path) {
  std::vector<double> values;
  std::size_t line_no = 0;
  while (!data.empty()) {
    ++line_no;
    const auto eol = data.find('\n');
    const auto line = trim(data.substr(0, eol));
    data = eol == std::string_view::npos ? std::string_view{} : data.substr(eol + 1);
    if (line.empty()) continue;

    double v = 0.0;
    const char* end = line.data() + line.size();
    // from_chars rejects a leading '+', which is common in exported dumps.
    const char* begin = line.front() == '+' ? line.data() + 1 : line.data();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                      std::string(line) + "'");
    }
    if (!std::isfinite(v)) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": non-finite value");
    }
    values.push_back(v);
  }
  return values;
}

std::vector<double> parse_raw(std::string_view data, const std::filesystem::path& path) {
  if (data.size() % 8 != 0) {
    throw DataError(path.string() + ": size " + std::to_string(data.size()) +
                    " is not a multiple of 8 bytes");
  }
  std::vector<double> values(data.size() / 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[8 * i + b])) << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
    if (!std::isfinite(values[i])) {
      throw DataError(path.string() + ": non-finite value at byte offset " + std::to_string(8 * i));
    }
  }
  return values;
}

bool is_text_path(const std::filesystem::path& path) {
  const auto ext = path.extension();
  return ext == ".csv" || ext == ".txt";
}

}  // namespace

std::vector<double> read_values(const std::filesystem::path& path, VectorFormat format) {
  const std::string data = read_file(path);
  if (format == VectorFormat::kAuto) {
    format = looks_like_text(data) ? VectorFormat::kCsv : VectorFormat::kRaw;
  }
  auto values = format == VectorFormat::kCsv ? parse_csv(data, path) : parse_raw(data, path);
  if (values.empty()) throw DataError(path.string() + ": no values");
  return values;
}

SiteVector load_vector(const std::filesystem::path& path, VectorFormat format) {
  return SiteVector::dense(0, read_values(path, format));
}

void write_values(const std::filesystem::path& path, std::span<const double> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  if (is_text_path(path)) {
    char buf[32];
    for (double v : values) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out.write(buf, ptr - buf);
      out.put('\n');
    }
  } else {
    for (double v : values) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      char bytes[8];
      for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>(bits >> (8 * b));
      out.write(bytes, 8);
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<std::uint64_t> site_keys(std::uint32_t site, std::uint64_t dimension,
                                     double key_overlap) {
  if (!(key_overlap >= 0.0 && key_overlap <= 1.0)) {
    throw ConfigError("key overlap must lie in [0, 1]");
  }
  const auto shared = static_cast<std::uint64_t>(std::llround(key_overlap * static_cast<double>(dimension)));
  const std::uint64_t unique = dimension - shared;
  std::vector<std::uint64_t> keys(dimension);
  for (std::uint64_t j = 0; j < dimension; ++j) {
    keys[j] = j < shared ? j : shared + site * unique + (j - shared);
  }
  return keys;
}

std::uint64_t key_space_size(std::uint32_t sites, std::uint64_t dimension, double key_overlap) {
  const auto shared = static_cast<std::uint64_t>(std::llround(key_overlap * static_cast<double>(dimension)));
  return shared + static_cast<std::uint64_t>(sites) * (dimension - shared);
}

std::vector<SiteVector> split_sites(std::span<const double> values, std::uint32_t sites,
                                    double key_overlap) {
  if (sites == 0) throw ConfigError("site count must be positive");
  const std::uint64_t chunk = values.size() / sites;
  if (chunk == 0) {
    throw DataError("cannot split " + std::to_string(values.size()) + " values across " +
                    std::to_string(sites) + " sites");
  }
  std::vector<SiteVector> out;
  out.reserve(sites);
  for (std::uint32_t i = 0; i < sites; ++i) {
    const auto part = values.subspan(i * chunk, chunk);
    auto keys = site_keys(i, chunk, key_overlap);
    const std::uint64_t space = key_space_size(sites, chunk, key_overlap);
    out.emplace_back(i, std::move(keys), std::vector<double>(part.begin(), part.end()), space);
  }
  return out;
}

}  // namespace bmm
