#ifndef MBTI_CORPUS_HPP_
#define MBTI_CORPUS_HPP_
#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mbti/core.hpp"

namespace mbti {

/// Raised when a corpus or record file violates its schema.
class SchemaError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A forum post. The label is the forum section the post was found in.
struct RawPost {
  std::string body;
  MbtiType section_label = all_types().front();
  std::int64_t post_index = 0;  // recency rank, 0 = most recent
  std::string source_url;

  friend bool operator==(const RawPost&, const RawPost&) = default;
};

struct CorpusStats {
  std::size_t post_count = 0;
  std::size_t word_count = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct Corpus {
  std::vector<RawPost> posts;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

struct Extraction {
  std::vector<RawPost> posts;
  std::vector<std::string> diagnostics;
};

/// Pulls post bodies out of a forum page.
///
/// A post is any element whose class list contains `message-body`. Quoted
/// replies (`blockquote`), signatures (`message-signature`), scripts and
/// styles are dropped; entities are decoded and whitespace is collapsed.
/// Blank posts are skipped. Posts get indices `first_index, first_index+1, ...`
/// in page order. Never throws on malformed markup: unterminated posts are
/// dropped and reported in `diagnostics`.
Extraction extract_posts(std::string_view html_page, MbtiType section_label,
                         std::string_view page_url = {}, std::int64_t first_index = 0);

/// Keeps posts whose body is strictly longer than `min_chars` code points.
std::vector<RawPost> filter_posts(std::vector<RawPost> posts, std::size_t min_chars = 50);

/// Keeps the `n` most recent posts (smallest `post_index`), preserving order.
std::vector<RawPost> cap_recent(std::vector<RawPost> posts, std::size_t n = 5000);

/// Post count and whitespace-delimited word count over raw bodies.
CorpusStats corpus_stats(const Corpus& corpus);

/// JSONL, one `{"type","body","idx","url"}` object per line.
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

/// Source of forum pages for one section. Pages are numbered from 1, most
/// recent first; `fetch_page` returns nothing past the last page.
class PageFetcher {
 public:
  struct Page {
    std::string html;
    std::string url;
  };

  virtual ~PageFetcher() = default;
  virtual std::optional<Page> fetch_page(MbtiType section, int page) = 0;
};

/// Reads `<dir>/<type>_page<n>.html` (type in lowercase). Page URLs are
/// reported as `fixture:<file name>`.
class FixtureFetcher final : public PageFetcher {
 public:
  explicit FixtureFetcher(std::filesystem::path dir);
  std::optional<Page> fetch_page(MbtiType section, int page) override;

 private:
  std::filesystem::path dir_;
};

struct HttpFetcherOptions {
  /// URL with `{type}` (lowercase code) and `{page}` placeholders.
  std::string url_template;
  std::chrono::milliseconds delay{1000};
  std::string user_agent = "mbti-scraper/0.1";
  int max_pages = 1000;
};

/// Rate-limited HTTP pager that honors robots.txt for the target host.
class HttpFetcher final : public PageFetcher {
 public:
  explicit HttpFetcher(HttpFetcherOptions options);
  ~HttpFetcher() override;
  std::optional<Page> fetch_page(MbtiType section, int page) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Disallow rules of robots.txt that apply to `user_agent`.
std::vector<std::string> parse_robots_disallow(std::string_view robots_txt,
                                               std::string_view user_agent);
bool robots_allows(const std::vector<std::string>& disallow, std::string_view path);

struct ScrapeOptions {
  std::size_t max_posts = 5000;
  std::size_t min_chars = 50;
};

/// Walks pages until the section is exhausted or enough qualifying posts are
/// collected, then applies the length filter and recency cap.
std::vector<RawPost> scrape_section(PageFetcher& fetcher, MbtiType section,
                                    const ScrapeOptions& options,
                                    std::vector<std::string>* diagnostics = nullptr);

}  // namespace mbti

#endif  // MBTI_CORPUS_HPP_
