#ifndef MBTI_TOKENIZER_HPP_
#define MBTI_TOKENIZER_HPP_
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mbti {

using TokenId = std::int32_t;

/// WordPiece vocabulary with fixed ids for the special tokens.
///
/// Text is pre-split on whitespace and punctuation (after optional
/// lowercasing), then each word is segmented greedily into the longest
/// matching pieces; continuation pieces carry a `##` prefix.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kCls = 2;
  static constexpr TokenId kSep = 3;
  static constexpr TokenId kMask = 4;
  /// The type-mention placeholder; an ordinary token that is never split.
  static constexpr TokenId kTypePlaceholder = 5;
  static constexpr TokenId kNumReserved = 6;

  /// The first kNumReserved entries must be the reserved tokens in id order.
  Vocabulary(std::vector<std::string> tokens, bool lowercase);

  static const std::vector<std::string>& reserved_tokens();

  [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
  [[nodiscard]] bool lowercase() const noexcept { return lowercase_; }
  [[nodiscard]] std::optional<TokenId> find(std::string_view token) const;
  [[nodiscard]] const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  /// [PAD], [UNK], [CLS], [SEP] and [MASK].
  [[nodiscard]] static bool is_special(TokenId id) noexcept { return id >= 0 && id < kTypePlaceholder; }

  /// Whitespace/punctuation pre-tokenization (with lowercasing when enabled).
  [[nodiscard]] std::vector<std::string> pre_tokenize(std::string_view text) const;
  /// WordPiece pieces for one pre-tokenized word.
  [[nodiscard]] std::vector<TokenId> word_pieces(std::string_view word) const;
  [[nodiscard]] std::vector<TokenId> encode(std::string_view text) const;
  /// Joins pieces back into space-separated words, skipping special tokens
  /// other than [UNK].
  [[nodiscard]] std::string decode(std::span<const TokenId> ids) const;

  /// Content hash identifying this vocabulary (tokens and case handling).
  [[nodiscard]] std::string version_id() const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path, bool lowercase);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.lowercase_ == b.lowercase_ && a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  bool lowercase_;
};

/// Learns a WordPiece vocabulary by repeatedly merging the most frequent
/// adjacent symbol pair (ties broken lexicographically) until `target_size`
/// tokens exist or no pair occurs at least twice. Every character seen in
/// `texts` is in the result, in both word-initial and `##` form.
Vocabulary build_vocabulary(std::span<const std::string> texts, std::size_t target_size,
                            bool lowercase);

}  // namespace mbti

#endif  // MBTI_TOKENIZER_HPP_
