#ifndef MBTI_PREPROCESS_HPP_
#define MBTI_PREPROCESS_HPP_
#pragma once

#include <string>
#include <string_view>

// Cleaning pipeline applied to raw post bodies before tokenization:
//
//   strip_symbols -> space_punctuation -> split_clitics
//     -> mask_type_mentions -> lowercase (unless case is preserved)
//
// Every stage normalizes whitespace to single spaces, so each stage and the
// whole pipeline are idempotent.
namespace mbti {

/// Placeholder substituted for explicit type mentions.
inline constexpr std::string_view kTypePlaceholder = "<type>";

struct CleanDocument {
  std::string tokens_text;
  bool preserve_case = false;

  friend bool operator==(const CleanDocument&, const CleanDocument&) = default;
};

/// Removes every character that is not a letter, digit, ASCII punctuation or
/// whitespace; collapses whitespace runs and trims.
std::string strip_symbols(std::string_view text);

/// Isolates each punctuation character as its own token.
///
/// Two exceptions keep later stages idempotent: the placeholder `<type>` is
/// atomic, and an apostrophe stays attached when it sits between two letters
/// ("you're") or opens a clitic token ("'re").
std::string space_punctuation(std::string_view text);

/// Splits 're, 'll, 've, 'd, 's, 'm and n't off the word they are attached to.
std::string split_clitics(std::string_view text);

/// Replaces standalone type codes (any case, optional plural "s") by `<type>`.
/// A code joined to a longer word by an apostrophe is left alone.
std::string mask_type_mentions(std::string_view text);

CleanDocument clean(std::string_view text, bool preserve_case);

}  // namespace mbti

#endif  // MBTI_PREPROCESS_HPP_
