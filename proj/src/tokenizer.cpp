#include "mbti/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "mbti/core.hpp"
#include "mbti/text.hpp"
#include "mbti/util.hpp"

namespace mbti {

namespace {

constexpr std::size_t kMaxWordChars = 100;
constexpr std::string_view kContinuation = "##";

}  // namespace

const std::vector<std::string>& Vocabulary::reserved_tokens() {
  static const std::vector<std::string> reserved{"[PAD]", "[UNK]", "[CLS]",
                                                 "[SEP]", "[MASK]", "<type>"};
  return reserved;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, bool lowercase)
    : tokens_(std::move(tokens)), lowercase_(lowercase) {
  const auto& reserved = reserved_tokens();
  if (tokens_.size() < reserved.size() ||
      !std::equal(reserved.begin(), reserved.end(), tokens_.begin())) {
    throw ValidationError("vocabulary must start with [PAD] [UNK] [CLS] [SEP] [MASK] <type>");
  }
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("empty token at id " + std::to_string(i));
    if (!ids_.emplace(tokens_[i], static_cast<TokenId>(i)).second) {
      throw ValidationError("duplicate token '" + tokens_[i] + "'");
    }
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Vocabulary::pre_tokenize(std::string_view input) const {
  const auto& reserved = reserved_tokens();
  std::vector<std::string> out;
  for (auto& chunk : text::split_whitespace(input)) {
    if (std::find(reserved.begin(), reserved.end(), chunk) != reserved.end()) {
      out.push_back(std::move(chunk));
      continue;
    }
    const std::string word = lowercase_ ? text::to_lower(chunk) : chunk;
    std::string current;
    for (char32_t c : text::decode_utf8(word)) {
      if (text::is_punct(c)) {
        if (!current.empty()) out.push_back(std::move(current));
        current.clear();
        out.emplace_back(1, static_cast<char>(c));
      } else {
        text::append_utf8(current, c);
      }
    }
    if (!current.empty()) out.push_back(std::move(current));
  }
  return out;
}

std::vector<TokenId> Vocabulary::word_pieces(std::string_view word) const {
  if (auto whole = find(word)) return {*whole};
  const auto cps = text::decode_utf8(word);
  if (cps.size() > kMaxWordChars) return {kUnk};
  std::vector<TokenId> pieces;
  std::size_t start = 0;
  while (start < cps.size()) {
    std::optional<TokenId> match;
    std::size_t end = cps.size();
    for (; end > start; --end) {
      std::string candidate = start > 0 ? std::string(kContinuation) : std::string();
      for (std::size_t k = start; k < end; ++k) text::append_utf8(candidate, cps[k]);
      if ((match = find(candidate))) break;
    }
    if (!match) return {kUnk};
    pieces.push_back(*match);
    start = end;
  }
  return pieces;
}

std::vector<TokenId> Vocabulary::encode(std::string_view input) const {
  std::vector<TokenId> ids;
  for (const auto& word : pre_tokenize(input)) {
    const auto pieces = word_pieces(word);
    ids.insert(ids.end(), pieces.begin(), pieces.end());
  }
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (is_special(id) && id != kUnk) continue;
    const std::string& piece = token(id);
    if (piece.starts_with(kContinuation) && !out.empty()) {
      out += piece.substr(kContinuation.size());
    } else {
      if (!out.empty()) out.push_back(' ');
      out += piece;
    }
  }
  return out;
}

std::string Vocabulary::version_id() const {
  std::string blob = lowercase_ ? "uncased\n" : "cased\n";
  for (const auto& t : tokens_) {
    blob += t;
    blob.push_back('\n');
  }
  return sha256_hex(blob).substr(0, 16);
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::string contents;
  for (const auto& t : tokens_) {
    contents += t;
    contents.push_back('\n');
  }
  write_file(path, contents);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path, bool lowercase) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return Vocabulary(std::move(tokens), lowercase);
}

Vocabulary build_vocabulary(std::span<const std::string> texts, std::size_t target_size,
                            bool lowercase) {
  const Vocabulary pre(Vocabulary::reserved_tokens(), lowercase);
  const auto& reserved = Vocabulary::reserved_tokens();

  std::map<std::string, std::size_t> word_counts;
  for (const auto& t : texts) {
    for (auto& w : pre.pre_tokenize(t)) {
      if (std::find(reserved.begin(), reserved.end(), w) != reserved.end()) continue;
      if (text::length(w) > kMaxWordChars) continue;
      ++word_counts[w];
    }
  }

  // Symbols are interned so that pair counting works on integers.
  std::vector<std::string> symbols;
  std::map<std::string, std::uint32_t> symbol_ids;
  const auto intern = [&](const std::string& s) {
    auto [it, inserted] = symbol_ids.emplace(s, static_cast<std::uint32_t>(symbols.size()));
    if (inserted) symbols.push_back(s);
    return it->second;
  };

  struct Word {
    std::vector<std::uint32_t> parts;
    std::size_t count;
  };
  std::vector<Word> words;
  std::set<std::string> alphabet;
  for (const auto& [w, count] : word_counts) {
    Word word{{}, count};
    const auto cps = text::decode_utf8(w);
    for (std::size_t i = 0; i < cps.size(); ++i) {
      std::string piece = i ? std::string(kContinuation) : std::string();
      text::append_utf8(piece, cps[i]);
      alphabet.insert(piece);
      word.parts.push_back(intern(piece));
    }
    words.push_back(std::move(word));
  }

  std::vector<std::string> vocab(reserved.begin(), reserved.end());
  std::set<std::string> present(vocab.begin(), vocab.end());
  for (const auto& a : alphabet) {
    if (present.insert(a).second) vocab.push_back(a);
  }

  while (vocab.size() < target_size) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.parts.size(); ++i) {
        pair_counts[{w.parts[i], w.parts[i + 1]}] += w.count;
      }
    }
    std::optional<std::pair<std::uint32_t, std::uint32_t>> best;
    std::size_t best_count = 1;
    for (const auto& [pair, count] : pair_counts) {
      const bool better =
          count > best_count ||
          (count == best_count && best &&
           std::tie(symbols[pair.first], symbols[pair.second]) <
               std::tie(symbols[best->first], symbols[best->second]));
      if (better) {
        best = pair;
        best_count = count;
      }
    }
    if (!best) break;
    const std::string& right = symbols[best->second];
    const std::string merged =
        symbols[best->first] +
        (right.starts_with(kContinuation) ? right.substr(kContinuation.size()) : right);
    const std::uint32_t merged_id = intern(merged);
    for (auto& w : words) {
      std::vector<std::uint32_t> parts;
      parts.reserve(w.parts.size());
      for (std::size_t i = 0; i < w.parts.size(); ++i) {
        if (i + 1 < w.parts.size() && w.parts[i] == best->first && w.parts[i + 1] == best->second) {
          parts.push_back(merged_id);
          ++i;
        } else {
          parts.push_back(w.parts[i]);
        }
      }
      w.parts = std::move(parts);
    }
    if (present.insert(merged).second) vocab.push_back(merged);
  }
  return Vocabulary(std::move(vocab), lowercase);
}

}  // namespace mbti
