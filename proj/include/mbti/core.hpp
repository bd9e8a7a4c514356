#ifndef MBTI_CORE_HPP_
#define MBTI_CORE_HPP_
#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mbti {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a user-supplied value or file does not satisfy a contract.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// One of the four dichotomies. Letters are listed in canonical order.
struct Axis {
  int index;
  char first;
  char second;

  /// Label of the form "E/I", used as a column heading in reports.
  [[nodiscard]] std::string label() const { return {first, '/', second}; }
};

inline constexpr std::array<Axis, 4> kAxes{{
    {0, 'E', 'I'},
    {1, 'N', 'S'},
    {2, 'F', 'T'},
    {3, 'P', 'J'},
}};

inline constexpr std::size_t kNumTypes = 16;

/// A four-letter personality code.
///
/// Stored as four bits: bit `i` is set when position `i` holds the second
/// letter of axis `i`. Only valid codes are constructible.
class MbtiType {
 public:
  /// Builds from the bit representation; `bits` must be below 16.
  static MbtiType from_bits(unsigned bits);

  /// Index of this type in `all_types()`.
  [[nodiscard]] std::size_t index() const noexcept { return index_; }
  [[nodiscard]] char letter(const Axis& axis) const noexcept;
  [[nodiscard]] std::string str() const;

  friend bool operator==(MbtiType, MbtiType) = default;
  friend auto operator<=>(MbtiType a, MbtiType b) { return a.index_ <=> b.index_; }

 private:
  explicit MbtiType(unsigned bits);
  unsigned bits_;
  std::size_t index_;
};

/// Case-insensitive parse. Throws ValidationError on anything but a valid code.
MbtiType parse_type(std::string_view s);

/// True if `s` parses as a type.
bool is_type(std::string_view s) noexcept;

/// Number of positions where the two types agree (0..4).
int match_count(MbtiType a, MbtiType b) noexcept;

inline char axis_letter(MbtiType t, const Axis& axis) noexcept { return t.letter(axis); }

/// All 16 types in lexicographic order of their letters.
const std::array<MbtiType, kNumTypes>& all_types();

std::ostream& operator<<(std::ostream& os, MbtiType t);

}  // namespace mbti

#endif  // MBTI_CORE_HPP_
