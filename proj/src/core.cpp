#include "mbti/core.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

namespace mbti {

namespace {

std::string letters_of(unsigned bits) {
  std::string s(4, ' ');
  for (const Axis& axis : kAxes) {
    s[axis.index] = (bits >> axis.index) & 1U ? axis.second : axis.first;
  }
  return s;
}

// Rank of each bit pattern in lexicographic order of its letters.
std::array<std::size_t, kNumTypes> lexicographic_ranks() {
  std::array<unsigned, kNumTypes> order{};
  for (unsigned b = 0; b < kNumTypes; ++b) order[b] = b;
  std::sort(order.begin(), order.end(),
            [](unsigned a, unsigned b) { return letters_of(a) < letters_of(b); });
  std::array<std::size_t, kNumTypes> rank{};
  for (std::size_t i = 0; i < kNumTypes; ++i) rank[order[i]] = i;
  return rank;
}

const std::array<std::size_t, kNumTypes>& ranks() {
  static const auto r = lexicographic_ranks();
  return r;
}

}  // namespace

MbtiType::MbtiType(unsigned bits) : bits_(bits), index_(ranks()[bits]) {}

MbtiType MbtiType::from_bits(unsigned bits) {
  if (bits >= kNumTypes) throw ValidationError("type bits out of range: " + std::to_string(bits));
  return MbtiType(bits);
}

char MbtiType::letter(const Axis& axis) const noexcept {
  return (bits_ >> axis.index) & 1U ? axis.second : axis.first;
}

std::string MbtiType::str() const { return letters_of(bits_); }

MbtiType parse_type(std::string_view s) {
  if (s.size() != 4) {
    throw ValidationError("invalid MBTI type '" + std::string(s) + "': expected 4 letters");
  }
  unsigned bits = 0;
  for (const Axis& axis : kAxes) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[axis.index])));
    if (c == axis.second) {
      bits |= 1U << axis.index;
    } else if (c != axis.first) {
      throw ValidationError("invalid MBTI type '" + std::string(s) + "': position " +
                            std::to_string(axis.index + 1) + " must be " + axis.label());
    }
  }
  return MbtiType::from_bits(bits);
}

bool is_type(std::string_view s) noexcept {
  if (s.size() != 4) return false;
  for (const Axis& axis : kAxes) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[axis.index])));
    if (c != axis.first && c != axis.second) return false;
  }
  return true;
}

int match_count(MbtiType a, MbtiType b) noexcept {
  int n = 0;
  for (const Axis& axis : kAxes) n += a.letter(axis) == b.letter(axis);
  return n;
}

const std::array<MbtiType, kNumTypes>& all_types() {
  static const auto types = []<std::size_t... I>(std::index_sequence<I...>) {
    std::array<unsigned, kNumTypes> bits_at{};
    for (unsigned b = 0; b < kNumTypes; ++b) bits_at[ranks()[b]] = b;
    return std::array<MbtiType, kNumTypes>{MbtiType::from_bits(bits_at[I])...};
  }(std::make_index_sequence<kNumTypes>{});
  return types;
}

std::ostream& operator<<(std::ostream& os, MbtiType t) { return os << t.str(); }

}  // namespace mbti
