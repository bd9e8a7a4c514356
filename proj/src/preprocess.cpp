#include "mbti/preprocess.hpp"

#include <array>
#include <vector>

#include "mbti/core.hpp"
#include "mbti/text.hpp"

namespace mbti {

namespace {

using text::decode_utf8;

constexpr std::array<std::u32string_view, 6> kApostropheClitics{U"re", U"ll", U"ve", U"d", U"s",
                                                                 U"m"};

bool is_word_char(char32_t c) { return text::is_letter(c) || text::is_digit(c); }

bool starts_with_at(const std::vector<char32_t>& cps, std::size_t i, std::u32string_view what) {
  if (i + what.size() > cps.size()) return false;
  for (std::size_t k = 0; k < what.size(); ++k) {
    if (cps[i + k] != what[k]) return false;
  }
  return true;
}

// True if an apostrophe at `i` is followed by a clitic suffix that ends the word.
bool opens_clitic(const std::vector<char32_t>& cps, std::size_t i) {
  for (auto clitic : kApostropheClitics) {
    std::size_t k = 0;
    while (k < clitic.size() && i + 1 + k < cps.size() &&
           text::to_lower(cps[i + 1 + k]) == clitic[k]) {
      ++k;
    }
    if (k != clitic.size()) continue;
    const std::size_t after = i + 1 + k;
    if (after == cps.size() || !is_word_char(cps[after])) return true;
  }
  return false;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// A stem must end in a word character, otherwise the next pass of
// space_punctuation would detach its trailing apostrophe.
bool valid_stem(const std::string& stem) {
  const auto cps = decode_utf8(stem);
  return !cps.empty() && is_word_char(cps.back());
}

void split_token(const std::string& token, std::vector<std::string>& out) {
  const std::string lower = text::to_lower(token);
  if (lower.size() > 3 && ends_with(lower, "n't") && valid_stem(token.substr(0, token.size() - 3))) {
    split_token(token.substr(0, token.size() - 3), out);
    out.push_back(token.substr(token.size() - 3));
    return;
  }
  const auto apostrophe = token.rfind('\'');
  if (apostrophe != std::string::npos && valid_stem(token.substr(0, apostrophe))) {
    const std::string suffix = lower.substr(apostrophe + 1);
    for (auto clitic : kApostropheClitics) {
      if (text::encode_utf8({clitic.begin(), clitic.end()}) == suffix) {
        split_token(token.substr(0, apostrophe), out);
        out.push_back(token.substr(apostrophe));
        return;
      }
    }
  }
  out.push_back(token);
}

}  // namespace

std::string strip_symbols(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  for (char32_t c : decode_utf8(input)) {
    if (text::is_letter(c) || text::is_digit(c) || text::is_punct(c)) {
      text::append_utf8(out, c);
    } else if (text::is_space(c)) {
      out.push_back(' ');
    }
  }
  return text::collapse_whitespace(out);
}

std::string space_punctuation(std::string_view input) {
  static const std::u32string_view placeholder = U"<type>";
  const auto cps = decode_utf8(input);
  std::string out;
  out.reserve(input.size() * 2);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t c = cps[i];
    if (c == U'<' && starts_with_at(cps, i, placeholder)) {
      out += " <type> ";
      i += placeholder.size() - 1;
      continue;
    }
    if (c == U'\'') {
      const bool after_letter = i > 0 && text::is_letter(cps[i - 1]);
      const bool before_letter = i + 1 < cps.size() && text::is_letter(cps[i + 1]);
      const bool at_token_start = i == 0 || text::is_space(cps[i - 1]);
      if ((after_letter && before_letter) || (at_token_start && opens_clitic(cps, i))) {
        out.push_back('\'');
        continue;
      }
    }
    if (text::is_punct(c)) {
      out.push_back(' ');
      text::append_utf8(out, c);
      out.push_back(' ');
    } else {
      text::append_utf8(out, c);
    }
  }
  return text::collapse_whitespace(out);
}

std::string split_clitics(std::string_view input) {
  std::vector<std::string> out;
  for (const auto& token : text::split_whitespace(input)) split_token(token, out);
  return text::join(out);
}

std::string mask_type_mentions(std::string_view input) {
  const auto cps = decode_utf8(input);
  std::string out;
  out.reserve(input.size());
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!is_word_char(cps[i])) {
      text::append_utf8(out, cps[i]);
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < cps.size() && is_word_char(cps[end])) ++end;
    std::string word;
    for (std::size_t k = i; k < end; ++k) text::append_utf8(word, cps[k]);
    const std::string lower = text::to_lower(word);
    // A run glued to an apostrophe belongs to a longer word ("x'intj",
    // "intj'sO"); masking it would let a later pass split that word apart.
    const bool glued = (i > 0 && cps[i - 1] == U'\'') || (end < cps.size() && cps[end] == U'\'');
    const bool mention = !glued && (is_type(lower) || (lower.size() == 5 && lower.back() == 's' &&
                                                       is_type(lower.substr(0, 4))));
    out += mention ? std::string(kTypePlaceholder) : word;
    i = end;
  }
  return text::collapse_whitespace(out);
}

CleanDocument clean(std::string_view input, bool preserve_case) {
  std::string s = strip_symbols(input);
  s = space_punctuation(s);
  s = split_clitics(s);
  s = mask_type_mentions(s);
  if (!preserve_case) s = text::to_lower(s);
  return {std::move(s), preserve_case};
}

}  // namespace mbti
