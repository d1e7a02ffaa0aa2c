#include "bmm/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "bmm/errors.hpp"

namespace bmm::wire {
namespace {

constexpr std::uint8_t kMagic[4] = {'B', 'M', 'M', 'X'};
constexpr std::uint32_t kFlagUnbiased = 1u;

class Writer {
 public:
  explicit Writer(std::size_t size) : out_(size) {}

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_[pos_ + i] = static_cast<std::uint8_t>(v >> (8 * i));
    pos_ += 4;
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_[pos_ + i] = static_cast<std::uint8_t>(v >> (8 * i));
    pos_ += 8;
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(std::span<const std::uint8_t> bytes) {
    std::memcpy(out_.data() + pos_, bytes.data(), bytes.size());
    pos_ += bytes.size();
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
  std::size_t pos_ = 0;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

double finite_field(double v, const char* name) {
  if (!std::isfinite(v)) throw DataError(std::string("corrupt value: non-finite ") + name);
  return v;
}

double nonnegative_field(double v, const char* name) {
  if (!(finite_field(v, name) >= 0.0)) {
    throw DataError(std::string("corrupt value: negative ") + name);
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_payload(const SitePayload& payload) {
  for (std::size_t i = 1; i < payload.entries.size(); ++i) {
    if (payload.entries[i].key <= payload.entries[i - 1].key) {
      throw DataError("payload keys must be strictly increasing (entry " + std::to_string(i) + ")");
    }
  }
  Writer w(encoded_size(payload.entries.size()));
  w.raw(kMagic);
  w.u32(kFormatVersion);
  w.u32(payload.site_id);
  w.u32(payload.unbiased_requested ? kFlagUnbiased : 0u);
  w.u64(payload.dimension);
  w.f64(payload.threshold);
  w.u64(payload.entries.size());
  w.f64(payload.target_n);
  w.f64(payload.summary.v_bar);
  w.f64(payload.summary.b_bar);
  w.f64(payload.summary.v_bar_mm);
  for (const auto& e : payload.entries) {
    w.u64(e.key);
    w.f64(e.value);
  }
  return w.take();
}

SitePayload decode_payload(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPrefixBytes) throw DataError("truncated payload: missing prefix");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError("unsupported format: bad magic");
  }
  Reader r(bytes.subspan(4));
  if (r.u32() != kFormatVersion) throw DataError("unsupported format: unknown version");
  if (bytes.size() < kFixedBytes) throw DataError("truncated payload: incomplete header");

  SitePayload p;
  p.site_id = r.u32();
  const std::uint32_t flags = r.u32();
  if ((flags & ~kFlagUnbiased) != 0) throw DataError("unsupported format: unknown flags");
  p.unbiased_requested = (flags & kFlagUnbiased) != 0;
  p.dimension = r.u64();
  p.threshold = nonnegative_field(r.f64(), "threshold");
  const std::uint64_t count = r.u64();
  p.target_n = nonnegative_field(r.f64(), "target sample size");
  p.summary.v_bar = nonnegative_field(r.f64(), "v_bar");
  p.summary.b_bar = nonnegative_field(r.f64(), "b_bar");
  p.summary.v_bar_mm = nonnegative_field(r.f64(), "v_bar_mm");
  if (p.dimension == 0) throw DataError("corrupt value: zero dimension");

  const std::size_t body = bytes.size() - kFixedBytes;
  if (count > body / kEntryBytes) {
    throw DataError("truncated payload: header declares " + std::to_string(count) +
                    " entries, buffer holds " + std::to_string(body / kEntryBytes));
  }
  if (body != count * kEntryBytes) {
    throw DataError("corrupt value: " + std::to_string(body - count * kEntryBytes) +
                    " trailing bytes");
  }
  p.entries.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    p.entries[i].key = r.u64();
    p.entries[i].value = finite_field(r.f64(), "entry value");
    if (i > 0 && p.entries[i].key <= p.entries[i - 1].key) {
      throw DataError("corrupt value: keys not strictly increasing at entry " + std::to_string(i));
    }
  }
  return p;
}

CompressionRatios effective_compression(const SitePayload& payload, double expected_n) {
  if (payload.dimension == 0) throw ConfigError("dimension must be positive");
  if (!(expected_n > 0.0)) throw ConfigError("expected sample size must be positive");
  const auto d = static_cast<double>(payload.dimension);
  return {d / expected_n,
          d * 8.0 / static_cast<double>(encoded_size(payload.entries.size()))};
}

CompressionRatios effective_compression(const SitePayload& payload) {
  return effective_compression(payload, payload.target_n);
}

void write_payload_file(const std::filesystem::path& path, const SitePayload& payload) {
  const auto bytes = encode_payload(payload);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

SitePayload read_payload_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_payload(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace bmm::wire
