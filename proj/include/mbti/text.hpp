#ifndef MBTI_TEXT_HPP_
#define MBTI_TEXT_HPP_
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small UTF-8 and character-class helpers shared by the ingestion, cleaning
// and tokenization code.
namespace mbti::text {

/// Decodes UTF-8 into code points. Malformed bytes are skipped.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

/// Letters are ASCII letters plus the Latin-1 supplement letters.
bool is_letter(char32_t c) noexcept;
bool is_digit(char32_t c) noexcept;
/// ASCII punctuation, i.e. `std::ispunct` in the C locale.
bool is_punct(char32_t c) noexcept;
/// ASCII whitespace and no-break space.
bool is_space(char32_t c) noexcept;
char32_t to_lower(char32_t c) noexcept;
bool is_upper(char32_t c) noexcept;

std::string to_lower(std::string_view s);

/// Splits on runs of ASCII whitespace; empty pieces are never returned.
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep = " ");

/// Collapses runs of whitespace into one space and trims both ends.
std::string collapse_whitespace(std::string_view s);

/// Number of code points.
std::size_t length(std::string_view s);

}  // namespace mbti::text

#endif  // MBTI_TEXT_HPP_
