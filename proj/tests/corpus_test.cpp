#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"
#include "mbti/corpus.hpp"
#include "mbti/text.hpp"
#include "mbti/util.hpp"

using namespace mbti;
namespace fs = std::filesystem;

namespace {

const MbtiType kIntj = parse_type("INTJ");

RawPost post_of_length(std::size_t n, std::int64_t idx = 0) {
  return {std::string(n, 'a'), kIntj, idx, "u"};
}

std::vector<RawPost> posts_with_indices(std::size_t n, std::uint64_t seed) {
  std::vector<RawPost> posts;
  for (std::size_t i = 0; i < n; ++i) posts.push_back(post_of_length(60, static_cast<std::int64_t>(i)));
  std::mt19937_64 rng(seed);
  std::shuffle(posts.begin(), posts.end(), rng);
  return posts;
}

fs::path temp_file(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "mbti_corpus_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("a saved forum page yields its 20 posts") {
  const auto html = read_file(MBTI_FIXTURES "/pages/intj_page1.html");
  const auto ex = extract_posts(html, kIntj, "page1", 100);
  REQUIRE(ex.posts.size() == 20);
  CHECK(ex.diagnostics.empty());
  CHECK(ex.posts[0].body == "Does anyone else plan their weekends down to the hour? I do it every Friday night.");
  CHECK(ex.posts[0].post_index == 100);
  CHECK(ex.posts[19].post_index == 119);
  CHECK(ex.posts[5].body == "Chess & coffee is my idea of a perfect Sunday morning, honestly.");
  CHECK(ex.posts[6].body == "Ten years in and I still can't decide if I'm an introvert or just tired.");
  CHECK(ex.posts[4].body == "Q: how do you deal with small talk? A: I don't, mostly.");
  for (const auto& p : ex.posts) {
    CHECK(p.section_label == kIntj);
    CHECK(p.source_url == "page1");
    CHECK(p.body.find("quoted post") == std::string::npos);
    CHECK(p.body.find("toaster") == std::string::npos);
    CHECK(p.body.find("color") == std::string::npos);
    CHECK(p.body.find("commented-out") == std::string::npos);
  }
  // "Welcome ...", "lol", "Nope." and the three-item list are 50 characters or fewer.
  CHECK(filter_posts(ex.posts).size() == 16);
}

TEST_CASE("blank posts are skipped") {
  const auto ex = extract_posts(read_file(MBTI_FIXTURES "/pages/blank_post.html"), kIntj, "u", 0);
  REQUIRE(ex.posts.size() == 2);
  CHECK(ex.posts[0].body == "First post with some words in it.");
  CHECK(ex.posts[1].body == "Third post, also with words.");
  CHECK(ex.posts[1].post_index == 1);
}

TEST_CASE("malformed markup is reported, not thrown") {
  Extraction ex;
  CHECK_NOTHROW(ex = extract_posts(read_file(MBTI_FIXTURES "/pages/malformed.html"), kIntj, "u", 0));
  REQUIRE(ex.posts.size() == 1);
  CHECK(ex.posts[0].body == "A complete post where 3 < 4 and tags nest badly.");
  CHECK_FALSE(ex.diagnostics.empty());
  CHECK(extract_posts("", kIntj, "u", 0).posts.empty());
  CHECK_NOTHROW(extract_posts("<div class=\"message-body\"><a href=\"x", kIntj, "u", 0));
}

TEST_CASE("length filter keeps only posts over the minimum") {
  const auto kept = filter_posts({post_of_length(49), post_of_length(50), post_of_length(51)});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].body.size() == 51);
  // Characters, not bytes: 50 two-byte letters are still 50 characters.
  std::string accented;
  for (int i = 0; i < 50; ++i) accented += "é";
  CHECK(filter_posts({{accented, kIntj, 0, "u"}}).empty());
  CHECK(filter_posts({{accented + "x", kIntj, 0, "u"}}).size() == 1);
}

TEST_CASE("cap_recent keeps the most recent posts") {
  const auto kept = cap_recent(posts_with_indices(7000, 3));
  REQUIRE(kept.size() == 5000);
  for (const auto& p : kept) CHECK(p.post_index < 5000);
  CHECK(cap_recent(posts_with_indices(3200, 4)).size() == 3200);
  CHECK(cap_recent(posts_with_indices(5000, 5)).size() == 5000);

  // Ties at the cutoff go to the earlier post in page order.
  std::vector<RawPost> tied = {post_of_length(60, 1), post_of_length(60, 0), post_of_length(61, 1)};
  const auto two = cap_recent(tied, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0].post_index == 1);
  CHECK(two[0].body.size() == 60);
  CHECK(two[1].post_index == 0);
}

TEST_CASE("corpus JSONL round trip") {
  Corpus c;
  c.posts = {{"plain text", kIntj, 0, "u1"},
             {"quotes \" and \\ backslash, naïve ★", parse_type("ENFP"), 7, "u2"},
             {"line\nbreak", parse_type("ISTP"), 2, ""}};
  const auto path = temp_file("roundtrip.jsonl");
  save_corpus(c, path);
  CHECK(load_corpus(path) == c);
  const auto first_line = read_file(path).substr(0, read_file(path).find('\n'));
  CHECK(first_line == R"({"type":"INTJ","body":"plain text","idx":0,"url":"u1"})");
}

TEST_CASE("corpus schema errors name the line") {
  const auto path = temp_file("bad.jsonl");
  write_file(path, "{\"type\":\"INTJ\",\"body\":\"ok\",\"idx\":0,\"url\":\"\"}\n{\"body\":\"x\",\"idx\":1,\"url\":\"\"}\n");
  try {
    load_corpus(path);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":2:") != std::string::npos);
    CHECK(msg.find("missing field 'type'") != std::string::npos);
  }
  write_file(path, "{\"type\":\"XXXX\",\"body\":\"x\",\"idx\":1,\"url\":\"\"}\n");
  CHECK_THROWS_AS(load_corpus(path), SchemaError);
  write_file(path, "not json\n");
  CHECK_THROWS_AS(load_corpus(path), SchemaError);
}

TEST_CASE("word count of the 1000-post fixture") {
  const auto corpus = load_corpus(MBTI_FIXTURES "/posts_1000.jsonl");
  const auto expected = std::stoul(read_file(MBTI_FIXTURES "/posts_1000.words"));
  const auto stats = corpus_stats(corpus);
  CHECK(stats.post_count == 1000);
  CHECK(stats.word_count == expected);
}

TEST_CASE("scraping saved sections") {
  FixtureFetcher fetcher(MBTI_FIXTURES "/forum");
  std::vector<std::string> diagnostics;
  // Two pages of six posts; the first page has one post too short to keep.
  const auto posts = scrape_section(fetcher, kIntj, {}, &diagnostics);
  CHECK(posts.size() == 11);
  CHECK(diagnostics.empty());
  for (const auto& p : posts) {
    CHECK(p.section_label == kIntj);
    CHECK(text::length(p.body) > 50);
    CHECK(p.body.find("Someone said") == std::string::npos);
    CHECK(p.body.find("sent from my phone") == std::string::npos);
  }
  CHECK(posts.front().source_url == "fixture:intj_page1.html");
  CHECK(posts.back().source_url == "fixture:intj_page2.html");
  CHECK(posts.back().post_index == 11);

  const auto capped = scrape_section(fetcher, kIntj, {3, 50});
  REQUIRE(capped.size() == 3);
  CHECK(capped[2].post_index == 2);

  FixtureFetcher empty(MBTI_FIXTURES "/does-not-exist");
  CHECK(scrape_section(empty, kIntj, {}).empty());
}

TEST_CASE("robots.txt rules") {
  const std::string robots =
      "User-agent: *\nDisallow: /private/\n\n"
      "User-agent: mbti-scraper\nDisallow: /search\nDisallow: /members/ # profiles\n";
  const auto rules = parse_robots_disallow(robots, "mbti-scraper/0.1");
  CHECK(robots_allows(rules, "/forums/intj/"));
  CHECK_FALSE(robots_allows(rules, "/search?q=x"));
  CHECK_FALSE(robots_allows(rules, "/members/1"));
  const auto other = parse_robots_disallow(robots, "somebot");
  CHECK_FALSE(robots_allows(other, "/private/x"));
  CHECK(robots_allows(other, "/search"));
  CHECK(robots_allows(parse_robots_disallow("", "x"), "/anything"));
}
