#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "prc/bitstring.hpp"

using prc::BitString;
using prc::RepetitionPattern;

TEST_CASE("BitString basics") {
  BitString empty;
  CHECK(empty.size() == 0);
  CHECK(empty.empty());
  CHECK(empty.value() == 0);
  CHECK(empty.str() == "");
  CHECK(empty.runs() == 0);

  auto s = BitString::from_string("0110");
  CHECK(s.size() == 4);
  CHECK(s.value() == 0b0110);
  CHECK(s.str() == "0110");
  CHECK(s.runs() == 3);
  CHECK_FALSE(s.bit(0));
  CHECK(s.bit(1));
  CHECK(s.bit(2));
  CHECK_FALSE(s.bit(3));

  // '0' and the empty string are distinct values
  CHECK(BitString::from_string("0") != empty);
  CHECK(BitString::from_value(3, 0b101) == BitString::from_string("101"));
  CHECK_THROWS_AS(BitString::from_string("01x"), std::invalid_argument);
}

TEST_CASE("BitString canonical order is (length, value)") {
  std::vector<BitString> v{
      BitString::from_string("1"),  BitString::from_string("00"),
      BitString::from_string(""),   BitString::from_string("11"),
      BitString::from_string("0"),  BitString::from_string("01"),
      BitString::from_string("10"), BitString::from_string("000"),
  };
  std::sort(v.begin(), v.end());
  std::vector<std::string> got;
  for (const auto& s : v) got.push_back(s.str());
  CHECK(got == std::vector<std::string>{"", "0", "1", "00", "01", "10", "11", "000"});
}

TEST_CASE("BitString long strings round-trip and order across word boundaries") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int len = static_cast<int>(rng() % 200);
    std::string text;
    for (int i = 0; i < len; ++i) text.push_back((rng() & 1) ? '1' : '0');
    auto s = BitString::from_string(text);
    REQUIRE(s.str() == text);
    auto c = s.complemented();
    REQUIRE(c.size() == s.size());
    for (std::uint32_t i = 0; i < s.size(); ++i) REQUIRE(c.bit(i) != s.bit(i));

    std::string other_text = text;
    if (!other_text.empty()) {
      const std::size_t at = rng() % other_text.size();
      other_text[at] = other_text[at] == '0' ? '1' : '0';
      const auto other = BitString::from_string(other_text);
      // equal length: order must agree with lexicographic string order
      REQUIRE((s < other) == (text < other_text));
    }
  }
}

TEST_CASE("BitString truncate keeps the comparison invariant") {
  auto s = BitString::from_string("110101110");
  s.truncate(4);
  CHECK(s == BitString::from_string("1101"));
  s.truncate(0);
  CHECK(s == BitString());
}

TEST_CASE("apply_pattern expands repetition patterns") {
  const auto x = BitString::from_string("01");
  CHECK(apply_pattern(x, RepetitionPattern{{0, 1}}) == BitString::from_string("1"));
  CHECK(apply_pattern(x, RepetitionPattern{{2, 0}}) == BitString::from_string("00"));
  CHECK(apply_pattern(x, RepetitionPattern{{1, 1}}) == BitString::from_string("01"));
  CHECK(apply_pattern(x, RepetitionPattern{{2, 1}}) == BitString::from_string("001"));
  CHECK(apply_pattern(x, RepetitionPattern{{0, 0}}) == BitString());
  CHECK_THROWS_AS(apply_pattern(x, RepetitionPattern{{1, 1, 1}}), std::invalid_argument);
}
