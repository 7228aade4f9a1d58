#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "prc/channel.hpp"

namespace prc::cache {

static_assert(std::endian::native == std::endian::little,
              "cache files are little-endian; big-endian hosts unsupported");

inline constexpr std::uint32_t kMagic = 0x4d435250u;  // "PRCM"
inline constexpr std::uint32_t kFormatVersion = 1;

namespace detail {

class Fnv1a {
 public:
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ull;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

template <class T>
void put(std::ofstream& out, Fnv1a* sum, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
  if (sum) sum->update(&v, sizeof(T));
}

template <class T>
bool get(std::ifstream& in, Fnv1a* sum, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) return false;
  if (sum) sum->update(&v, sizeof(T));
  return true;
}

inline std::vector<std::uint8_t> pack_bits(const BitString& s) {
  std::vector<std::uint8_t> bytes((s.size() + 7) / 8, 0);
  for (std::uint32_t i = 0; i < s.size(); ++i)
    if (s.bit(i)) bytes[i / 8] |= std::uint8_t(0x80) >> (i % 8);
  return bytes;
}

inline BitString unpack_bits(std::uint32_t len, const std::vector<std::uint8_t>& bytes) {
  BitString s;
  for (std::uint32_t i = 0; i < len; ++i)
    s.push_back((bytes[i / 8] >> (7 - i % 8)) & 1u);
  return s;
}

}  // namespace detail

// File layout, little-endian throughout:
//   u32 magic, u32 format_version, u64 checksum,
//   f64 lambda, i32 L, i32 R_m, i32 Rbar (-1 if absent), u8 conditioned,
//   u64 output_count,
//   outputs: { u32 len, ceil(len/8) bytes MSB-first } each,
//   entries: rows*cols f64, row-major (dense, regardless of in-memory form).
// The checksum is FNV-1a over every byte after the checksum field.
inline void save_matrix(const TransitionMatrix& m, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open cache file for writing: " + file.string());

  detail::Fnv1a sum;
  detail::put(out, nullptr, kMagic);
  detail::put(out, nullptr, kFormatVersion);
  const auto checksum_pos = out.tellp();
  detail::put(out, nullptr, std::uint64_t(0));  // patched below

  detail::put(out, &sum, m.spec.lambda);
  detail::put(out, &sum, std::int32_t(m.spec.block_len));
  detail::put(out, &sum, std::int32_t(m.spec.max_output_len));
  detail::put(out, &sum, std::int32_t(m.spec.per_bit_cap ? *m.spec.per_bit_cap : -1));
  detail::put(out, &sum, std::uint8_t(m.spec.conditioned ? 1 : 0));
  detail::put(out, &sum, std::uint64_t(m.outputs.size()));

  for (const auto& y : m.outputs) {
    detail::put(out, &sum, std::uint32_t(y.size()));
    auto bytes = detail::pack_bits(y);
    if (!bytes.empty()) {
      out.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
      sum.update(bytes.data(), bytes.size());
    }
  }

  std::vector<double> row(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::fill(row.begin(), row.end(), 0.0);
    m.for_each(r, [&](std::size_t c, double p) { row[c] = p; });
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
    sum.update(row.data(), row.size() * sizeof(double));
  }

  out.seekp(checksum_pos);
  detail::put(out, nullptr, sum.value());
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

// Loads a cached matrix. Returns nullopt (with a reason in *error) when the
// file is missing, malformed, fails its checksum, or exceeds the memory
// budget; storage layout and row_mass are reconstructed exactly as
// build_matrix would produce them.
inline std::optional<TransitionMatrix> load_matrix(
    const std::filesystem::path& file, std::string* error = nullptr,
    std::size_t memory_budget = SIZE_MAX) {
  auto fail = [&](const std::string& why) -> std::optional<TransitionMatrix> {
    if (error) *error = why;
    return std::nullopt;
  };
  std::ifstream in(file, std::ios::binary);
  if (!in) return fail("cannot open");

  std::uint32_t magic = 0, version = 0;
  std::uint64_t stored_sum = 0;
  if (!detail::get(in, nullptr, magic) || magic != kMagic) return fail("bad magic");
  if (!detail::get(in, nullptr, version) || version != kFormatVersion)
    return fail("unsupported format version");
  if (!detail::get(in, nullptr, stored_sum)) return fail("truncated header");

  detail::Fnv1a sum;
  ChannelSpec spec;
  std::int32_t L = 0, Rm = 0, Rbar = -1;
  std::uint8_t conditioned = 0;
  std::uint64_t n_out = 0;
  if (!detail::get(in, &sum, spec.lambda) || !detail::get(in, &sum, L) ||
      !detail::get(in, &sum, Rm) || !detail::get(in, &sum, Rbar) ||
      !detail::get(in, &sum, conditioned) || !detail::get(in, &sum, n_out))
    return fail("truncated header");
  spec.block_len = L;
  spec.max_output_len = Rm;
  if (Rbar >= 0) spec.per_bit_cap = Rbar;
  spec.conditioned = conditioned != 0;
  try {
    spec.validate();
  } catch (const std::exception& e) {
    return fail(std::string("invalid spec: ") + e.what());
  }

  const std::size_t n_rows = std::size_t(1) << spec.block_len;
  const std::size_t required = n_rows * n_out * sizeof(double);
  if (required > memory_budget) return fail("exceeds memory budget");

  std::vector<BitString> outputs;
  outputs.reserve(n_out);
  for (std::uint64_t i = 0; i < n_out; ++i) {
    std::uint32_t len = 0;
    if (!detail::get(in, &sum, len)) return fail("truncated output list");
    if (len > 64) return fail("output length out of range");
    std::vector<std::uint8_t> bytes((len + 7) / 8);
    if (!bytes.empty()) {
      in.read(reinterpret_cast<char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
      if (!in) return fail("truncated output list");
      sum.update(bytes.data(), bytes.size());
    }
    outputs.push_back(detail::unpack_bits(len, bytes));
  }

  std::vector<double> entries(n_rows * n_out);
  in.read(reinterpret_cast<char*>(entries.data()),
          static_cast<std::streamsize>(entries.size() * sizeof(double)));
  if (!in) return fail("truncated entries");
  sum.update(entries.data(), entries.size() * sizeof(double));
  in.peek();
  if (!in.eof()) return fail("trailing bytes");
  if (sum.value() != stored_sum) return fail("checksum mismatch");

  TransitionMatrix m;
  m.spec = spec;
  m.outputs = std::move(outputs);
  m.row_mass = spec.validity_probability();

  std::size_t nnz = 0;
  for (double p : entries) nnz += p != 0.0;
  m.dense = n_out == 0 || nnz * 10 >= n_rows * n_out;
  if (m.dense) {
    m.dense_rows = std::move(entries);
  } else {
    m.sparse_rows.resize(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r)
      for (std::size_t c = 0; c < n_out; ++c)
        if (double p = entries[r * n_out + c]; p != 0.0)
          m.sparse_rows[r].emplace_back(static_cast<std::uint32_t>(c), p);
  }
  return m;
}

// Cache keys quantize lambda to 12 significant digits so formatting noise
// cannot split equivalent entries.
inline std::string cache_file_name(const ChannelSpec& spec) {
  char lam[64];
  std::snprintf(lam, sizeof(lam), "%.12g", spec.lambda);
  std::string name = "prcm_L";
  name += std::to_string(spec.block_len);
  name += "_Rm" + std::to_string(spec.max_output_len);
  name += "_Rbar" + std::to_string(spec.per_bit_cap ? *spec.per_bit_cap : -1);
  name += spec.conditioned ? "_cond1" : "_cond0";
  name += "_lam";
  name += lam;
  name += ".bin";
  return name;
}

struct CacheEntry {
  std::string file;
  ChannelSpec spec;
  std::uint64_t output_count = 0;
  std::uintmax_t file_bytes = 0;
  bool checksum_ok = false;
  std::string note;  // failure reason when !checksum_ok
};

namespace detail {

// Reads header fields and streams the remainder through the checksum without
// materializing the matrix.
inline bool verify_file(const std::filesystem::path& file, CacheEntry& e,
                        std::string* why) {
  std::ifstream in(file, std::ios::binary);
  if (!in) return *why = "cannot open", false;

  std::uint32_t magic = 0, version = 0;
  std::uint64_t stored_sum = 0;
  if (!get(in, nullptr, magic) || magic != kMagic) return *why = "bad magic", false;
  if (!get(in, nullptr, version) || version != kFormatVersion)
    return *why = "unsupported format version", false;
  if (!get(in, nullptr, stored_sum)) return *why = "truncated header", false;

  Fnv1a sum;
  std::int32_t L = 0, Rm = 0, Rbar = -1;
  std::uint8_t conditioned = 0;
  std::uint64_t n_out = 0;
  if (!get(in, &sum, e.spec.lambda) || !get(in, &sum, L) || !get(in, &sum, Rm) ||
      !get(in, &sum, Rbar) || !get(in, &sum, conditioned) || !get(in, &sum, n_out))
    return *why = "truncated header", false;
  e.spec.block_len = L;
  e.spec.max_output_len = Rm;
  if (Rbar >= 0) e.spec.per_bit_cap = Rbar;
  e.spec.conditioned = conditioned != 0;
  e.output_count = n_out;

  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    sum.update(buf, static_cast<std::size_t>(in.gcount()));
    if (in.eof()) break;
  }
  if (sum.value() != stored_sum) return *why = "checksum mismatch", false;
  return true;
}

}  // namespace detail

// Lists every cache file under dir with its spec parameters, dimensions,
// size, and checksum validity. Corrupted files are flagged, never deleted.
inline std::vector<CacheEntry> cache_inspect(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("not a readable directory: " + dir.string());

  std::vector<CacheEntry> entries;
  for (const auto& item : std::filesystem::directory_iterator(dir)) {
    if (!item.is_regular_file()) continue;
    const auto name = item.path().filename().string();
    if (name.rfind("prcm_", 0) != 0) continue;

    CacheEntry e;
    e.file = name;
    e.file_bytes = item.file_size();
    std::string why;
    e.checksum_ok = detail::verify_file(item.path(), e, &why);
    if (!e.checksum_ok) e.note = why;
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const CacheEntry& a, const CacheEntry& b) { return a.file < b.file; });
  return entries;
}

}  // namespace prc::cache
