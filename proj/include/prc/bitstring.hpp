#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace prc {

// Binary string of bounded length. Bit i (0-based from the most significant
// end) lives in words_[i/64] at bit position 63 - i%64, and the unused low
// bits of the last word are kept zero, so comparing words lexicographically
// compares strings in (length, numeric-value) order. The empty string is a
// valid value distinct from every nonempty string.
class BitString {
 public:
  BitString() = default;

  // Builds a string of `len` bits from the low `len` bits of `value`,
  // most significant bit first. len <= 64.
  static BitString from_value(std::uint32_t len, std::uint64_t value) {
    if (len > 64) throw std::invalid_argument("BitString::from_value: len > 64");
    BitString s;
    for (std::uint32_t i = 0; i < len; ++i)
      s.push_back(((value >> (len - 1 - i)) & 1u) != 0);
    return s;
  }

  static BitString from_string(std::string_view text) {
    BitString s;
    for (char c : text) {
      if (c != '0' && c != '1')
        throw std::invalid_argument("BitString::from_string: expected only '0'/'1'");
      s.push_back(c == '1');
    }
    return s;
  }

  std::uint32_t size() const { return len_; }
  bool empty() const { return len_ == 0; }

  bool bit(std::uint32_t i) const {
    return (words_[i >> 6] >> (63 - (i & 63))) & 1u;
  }

  void push_back(bool b) {
    if ((len_ & 63) == 0) words_.push_back(0);
    if (b) words_.back() |= std::uint64_t(1) << (63 - (len_ & 63));
    ++len_;
  }

  void append_run(bool b, std::uint32_t count) {
    for (std::uint32_t i = 0; i < count; ++i) push_back(b);
  }

  // Drops bits beyond new_len; new_len must not exceed size().
  void truncate(std::uint32_t new_len) {
    if (new_len > len_) throw std::invalid_argument("BitString::truncate: growing");
    len_ = new_len;
    words_.resize((len_ + 63) / 64);
    if (len_ & 63) words_.back() &= ~std::uint64_t(0) << (64 - (len_ & 63));
  }

  // Numeric value of the bits read most-significant-first. size() <= 64.
  std::uint64_t value() const {
    if (len_ > 64) throw std::logic_error("BitString::value: string longer than 64 bits");
    if (len_ == 0) return 0;
    return words_[0] >> (64 - len_);
  }

  std::string str() const {
    std::string s;
    s.reserve(len_);
    for (std::uint32_t i = 0; i < len_; ++i) s.push_back(bit(i) ? '1' : '0');
    return s;
  }

  int runs() const {
    if (len_ == 0) return 0;
    int n = 1;
    for (std::uint32_t i = 1; i < len_; ++i) n += bit(i) != bit(i - 1);
    return n;
  }

  BitString complemented() const {
    BitString s(*this);
    for (auto& w : s.words_) w = ~w;
    if (len_ & 63) s.words_.back() &= ~std::uint64_t(0) << (64 - (len_ & 63));
    return s;
  }

  friend bool operator==(const BitString& a, const BitString& b) {
    return a.len_ == b.len_ && a.words_ == b.words_;
  }

  // Canonical order: by length, then by numeric value MSB-first.
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
    if (auto c = a.len_ <=> b.len_; c != 0) return c;
    for (std::size_t k = 0; k < a.words_.size(); ++k)
      if (auto c = a.words_[k] <=> b.words_[k]; c != 0) return c;
    return std::strong_ordering::equal;
  }

  std::size_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v;
      h *= 0x100000001b3ull;
    };
    mix(len_);
    for (auto w : words_) mix(w);
    return static_cast<std::size_t>(h);
  }

 private:
  std::uint32_t len_ = 0;
  std::vector<std::uint64_t> words_;
};

// Per-bit repetition counts (r_1 ... r_L) for a block of L input bits.
struct RepetitionPattern {
  std::vector<int> counts;

  RepetitionPattern() = default;
  explicit RepetitionPattern(std::vector<int> c) : counts(std::move(c)) {}
};

// Expands x through a repetition pattern: each bit x_i is emitted counts[i]
// times, in order. Zero counts delete the bit.
inline BitString apply_pattern(const BitString& x, const RepetitionPattern& pattern) {
  if (pattern.counts.size() != x.size())
    throw std::invalid_argument("apply_pattern: pattern length != input length");
  BitString y;
  for (std::uint32_t i = 0; i < x.size(); ++i) {
    int r = pattern.counts[i];
    if (r < 0) throw std::invalid_argument("apply_pattern: negative repetition count");
    y.append_run(x.bit(i), static_cast<std::uint32_t>(r));
  }
  return y;
}

}  // namespace prc

template <>
struct std::hash<prc::BitString> {
  std::size_t operator()(const prc::BitString& s) const noexcept { return s.hash(); }
};
