#include "mbti/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mbti/text.hpp"

namespace mbti {

namespace {

using ordered_json = nlohmann::ordered_json;

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct NamedEntity {
  std::string_view name;
  char32_t code;
};

constexpr std::array<NamedEntity, 20> kEntities{{
    {"amp", U'&'},       {"lt", U'<'},        {"gt", U'>'},       {"quot", U'"'},
    {"apos", U'\''},     {"nbsp", 0xA0},      {"hellip", 0x2026}, {"mdash", 0x2014},
    {"ndash", 0x2013},   {"lsquo", 0x2018},   {"rsquo", 0x2019},  {"ldquo", 0x201C},
    {"rdquo", 0x201D},   {"copy", 0xA9},      {"reg", 0xAE},      {"eacute", 0xE9},
    {"egrave", 0xE8},    {"agrave", 0xE0},    {"ccedil", 0xE7},   {"uuml", 0xFC},
}};

// Typographic punctuation is folded to its ASCII counterpart so that the
// cleaning stage sees ordinary apostrophes and quotes.
void append_normalized(std::string& out, char32_t c) {
  switch (c) {
    case 0x2018:
    case 0x2019:
    case 0x201A:
    case 0x201B:
      out.push_back('\'');
      return;
    case 0x201C:
    case 0x201D:
    case 0x201E:
      out.push_back('"');
      return;
    case 0x2013:
    case 0x2014:
      out.push_back('-');
      return;
    case 0x2026:
      out += "...";
      return;
    case 0xA0:
      out.push_back(' ');
      return;
    default:
      text::append_utf8(out, c);
  }
}

std::string decode_entities(std::string_view s) {
  std::string decoded;
  decoded.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == '&') {
      const auto semi = s.find(';', i + 1);
      if (semi != std::string_view::npos && semi - i <= 10) {
        const std::string_view name = s.substr(i + 1, semi - i - 1);
        std::optional<char32_t> code;
        if (!name.empty() && name[0] == '#') {
          const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
          const std::string digits(name.substr(hex ? 2 : 1));
          if (!digits.empty() &&
              std::all_of(digits.begin(), digits.end(), [hex](unsigned char c) {
                return hex ? std::isxdigit(c) : std::isdigit(c);
              })) {
            const unsigned long v = std::stoul(digits, nullptr, hex ? 16 : 10);
            if (v > 0 && v <= 0x10FFFF) code = static_cast<char32_t>(v);
          }
        } else {
          for (const auto& e : kEntities) {
            if (e.name == name) code = e.code;
          }
        }
        if (code) {
          text::append_utf8(decoded, *code);
          i = semi + 1;
          continue;
        }
      }
    }
    decoded.push_back(s[i]);
    ++i;
  }
  std::string out;
  out.reserve(decoded.size());
  for (char32_t c : text::decode_utf8(decoded)) append_normalized(out, c);
  return out;
}

bool has_class(std::string_view class_attr, std::string_view cls) {
  for (const auto& token : text::split_whitespace(class_attr)) {
    if (token == cls) return true;
  }
  return false;
}

bool is_void_element(std::string_view name) {
  static constexpr std::array<std::string_view, 10> kVoid{
      "br", "img", "hr", "meta", "link", "input", "source", "wbr", "area", "col"};
  return std::find(kVoid.begin(), kVoid.end(), name) != kVoid.end();
}

bool is_block_element(std::string_view name) {
  static constexpr std::array<std::string_view, 14> kBlock{
      "p",  "div", "li", "ul", "ol", "tr", "td", "h1",
      "h2", "h3",  "h4", "h5", "h6", "blockquote"};
  return std::find(kBlock.begin(), kBlock.end(), name) != kBlock.end();
}

struct Tag {
  std::string name;
  std::string class_attr;
  bool closing = false;
  bool self_closing = false;
  std::size_t end = 0;  // one past '>'
};

// Parses a tag starting at `pos` (which holds '<'). Returns nothing if the tag
// never closes.
std::optional<Tag> parse_tag(std::string_view s, std::size_t pos) {
  Tag tag;
  std::size_t i = pos + 1;
  if (i < s.size() && s[i] == '/') {
    tag.closing = true;
    ++i;
  }
  const std::size_t name_start = i;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '-')) ++i;
  tag.name = lower_ascii(s.substr(name_start, i - name_start));
  while (i < s.size() && s[i] != '>') {
    if (s[i] == '/' && i + 1 < s.size() && s[i + 1] == '>') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(s[i]))) {
      const std::size_t attr_start = i;
      while (i < s.size() && s[i] != '=' && s[i] != '>' && s[i] != '/' &&
             !std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
      }
      const std::string attr = lower_ascii(s.substr(attr_start, i - attr_start));
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i < s.size() && s[i] == '=') {
        ++i;
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::string value;
        if (i < s.size() && (s[i] == '"' || s[i] == '\'')) {
          const char quote = s[i];
          const auto close = s.find(quote, i + 1);
          if (close == std::string_view::npos) return std::nullopt;
          value = std::string(s.substr(i + 1, close - i - 1));
          i = close + 1;
        } else {
          const std::size_t v = i;
          while (i < s.size() && s[i] != '>' && !std::isspace(static_cast<unsigned char>(s[i]))) {
            ++i;
          }
          value = std::string(s.substr(v, i - v));
        }
        if (attr == "class") tag.class_attr = value;
      }
      continue;
    }
    ++i;
  }
  if (i >= s.size()) return std::nullopt;
  tag.end = i + 1;
  return tag;
}

struct OpenElement {
  std::string name;
  bool post_root = false;
  bool suppress = false;
};

}  // namespace

Extraction extract_posts(std::string_view html, MbtiType section_label, std::string_view page_url,
                         std::int64_t first_index) {
  Extraction result;
  std::vector<OpenElement> stack;
  bool in_post = false;
  int suppress_depth = 0;
  std::string current;
  std::int64_t next_index = first_index;

  const auto finish_post = [&] {
    std::string body = text::collapse_whitespace(decode_entities(current));
    if (!body.empty()) {
      result.posts.push_back({std::move(body), section_label, next_index++, std::string(page_url)});
    }
    current.clear();
    in_post = false;
  };

  std::size_t i = 0;
  while (i < html.size()) {
    if (html[i] != '<') {
      const auto next = html.find('<', i);
      const std::size_t end = next == std::string_view::npos ? html.size() : next;
      if (in_post && suppress_depth == 0) current.append(html.substr(i, end - i));
      i = end;
      continue;
    }
    if (html.substr(i, 4) == "<!--") {
      const auto close = html.find("-->", i + 4);
      if (close == std::string_view::npos) {
        result.diagnostics.push_back("unterminated comment at byte " + std::to_string(i));
        break;
      }
      i = close + 3;
      continue;
    }
    const char next_char = i + 1 < html.size() ? html[i + 1] : '\0';
    if (next_char == '!' || next_char == '?') {
      const auto close = html.find('>', i);
      if (close == std::string_view::npos) break;
      i = close + 1;
      continue;
    }
    if (!(std::isalpha(static_cast<unsigned char>(next_char)) || next_char == '/')) {
      if (in_post && suppress_depth == 0) current.push_back('<');
      ++i;
      continue;
    }
    const auto tag = parse_tag(html, i);
    if (!tag) {
      result.diagnostics.push_back("unterminated tag at byte " + std::to_string(i));
      break;
    }
    i = tag->end;
    if (in_post && suppress_depth == 0 && (is_block_element(tag->name) || tag->name == "br")) {
      current.push_back('\n');
    }

    if (tag->closing) {
      auto match = std::find_if(stack.rbegin(), stack.rend(),
                                [&](const OpenElement& e) { return e.name == tag->name; });
      if (match == stack.rend()) continue;
      const auto keep = static_cast<std::size_t>(stack.rend() - match) - 1;
      while (stack.size() > keep) {
        const OpenElement& top = stack.back();
        if (top.suppress) --suppress_depth;
        if (top.post_root) finish_post();
        stack.pop_back();
      }
      continue;
    }

    if (tag->name == "script" || tag->name == "style") {
      if (tag->self_closing) continue;
      const std::string close_tag = "</" + tag->name;
      std::size_t close = i;
      while (true) {
        close = html.find("</", close);
        if (close == std::string_view::npos || iequals(html.substr(close, close_tag.size()), close_tag)) {
          break;
        }
        close += 2;
      }
      if (close == std::string_view::npos) {
        result.diagnostics.push_back("unterminated <" + tag->name + "> element");
        break;
      }
      const auto end = html.find('>', close);
      i = end == std::string_view::npos ? html.size() : end + 1;
      continue;
    }
    if (tag->self_closing || is_void_element(tag->name)) continue;

    OpenElement element{tag->name, false, false};
    if (!in_post && has_class(tag->class_attr, "message-body")) {
      element.post_root = true;
      in_post = true;
      current.clear();
    } else if (tag->name == "blockquote" || has_class(tag->class_attr, "message-signature")) {
      element.suppress = true;
      ++suppress_depth;
    }
    stack.push_back(std::move(element));
  }

  if (in_post) {
    result.diagnostics.push_back("post " + std::to_string(next_index) +
                                 " is never closed; dropped");
  }
  return result;
}

std::vector<RawPost> filter_posts(std::vector<RawPost> posts, std::size_t min_chars) {
  std::erase_if(posts, [min_chars](const RawPost& p) { return text::length(p.body) <= min_chars; });
  return posts;
}

std::vector<RawPost> cap_recent(std::vector<RawPost> posts, std::size_t n) {
  if (posts.size() <= n) return posts;
  std::vector<std::int64_t> indices;
  indices.reserve(posts.size());
  for (const auto& p : posts) indices.push_back(p.post_index);
  std::nth_element(indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(n - 1),
                   indices.end());
  const std::int64_t cutoff = indices[n - 1];
  // Ties at the cutoff are resolved by page order.
  std::size_t below = 0;
  for (const auto& p : posts) below += p.post_index < cutoff;
  std::size_t ties_allowed = n - below;
  std::vector<RawPost> kept;
  kept.reserve(n);
  for (auto& p : posts) {
    if (p.post_index < cutoff) {
      kept.push_back(std::move(p));
    } else if (p.post_index == cutoff && ties_allowed > 0) {
      --ties_allowed;
      kept.push_back(std::move(p));
    }
  }
  return kept;
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.post_count = corpus.posts.size();
  for (const auto& p : corpus.posts) stats.word_count += text::split_whitespace(p.body).size();
  return stats;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  for (const auto& p : corpus.posts) {
    ordered_json line;
    line["type"] = p.section_label.str();
    line["body"] = p.body;
    line["idx"] = p.post_index;
    line["url"] = p.source_url;
    out << line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(where + "invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw SchemaError(where + "expected a JSON object");
    for (const char* field : {"type", "body", "idx", "url"}) {
      if (!j.contains(field)) {
        throw SchemaError(where + "missing field '" + field + "'" +
                          (std::string_view(field) == "type" ? " (section label)" : ""));
      }
    }
    if (!j["type"].is_string() || !j["body"].is_string() || !j["idx"].is_number_integer() ||
        !j["url"].is_string()) {
      throw SchemaError(where + "field has the wrong JSON type");
    }
    RawPost post;
    try {
      post.section_label = parse_type(j["type"].get<std::string>());
    } catch (const ValidationError& e) {
      throw SchemaError(where + e.what());
    }
    post.body = j["body"].get<std::string>();
    if (post.body.empty()) throw SchemaError(where + "empty body");
    post.post_index = j["idx"].get<std::int64_t>();
    post.source_url = j["url"].get<std::string>();
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

FixtureFetcher::FixtureFetcher(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::optional<PageFetcher::Page> FixtureFetcher::fetch_page(MbtiType section, int page) {
  const auto file = dir_ / (text::to_lower(section.str()) + "_page" + std::to_string(page) + ".html");
  std::ifstream in(file, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return Page{ss.str(), "fixture:" + file.filename().string()};
}

std::vector<std::string> parse_robots_disallow(std::string_view robots_txt,
                                               std::string_view user_agent) {
  std::vector<std::string> wildcard;
  std::vector<std::string> specific;
  bool matched_specific = false;
  bool group_wildcard = false;
  bool group_specific = false;
  bool in_agents = false;
  const std::string ua = lower_ascii(user_agent);

  std::istringstream in{std::string(robots_txt)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = lower_ascii(text::collapse_whitespace(line.substr(0, colon)));
    const std::string value = text::collapse_whitespace(line.substr(colon + 1));
    if (key == "user-agent") {
      if (!in_agents) {
        group_wildcard = false;
        group_specific = false;
      }
      in_agents = true;
      const std::string agent = lower_ascii(value);
      if (agent == "*") {
        group_wildcard = true;
      } else if (!agent.empty() && ua.find(agent) != std::string::npos) {
        group_specific = true;
        matched_specific = true;
      }
      continue;
    }
    in_agents = false;
    if (key == "disallow" && !value.empty()) {
      if (group_specific) specific.push_back(value);
      if (group_wildcard) wildcard.push_back(value);
    }
  }
  return matched_specific ? specific : wildcard;
}

bool robots_allows(const std::vector<std::string>& disallow, std::string_view path) {
  return std::none_of(disallow.begin(), disallow.end(),
                      [&](const std::string& rule) { return path.starts_with(rule); });
}

std::vector<RawPost> scrape_section(PageFetcher& fetcher, MbtiType section,
                                    const ScrapeOptions& options,
                                    std::vector<std::string>* diagnostics) {
  std::vector<RawPost> collected;
  std::int64_t next_index = 0;
  for (int page = 1;; ++page) {
    auto fetched = fetcher.fetch_page(section, page);
    if (!fetched) break;
    auto extraction = extract_posts(fetched->html, section, fetched->url, next_index);
    if (diagnostics) {
      for (auto& d : extraction.diagnostics) diagnostics->push_back(fetched->url + ": " + d);
    }
    if (extraction.posts.empty()) break;
    next_index += static_cast<std::int64_t>(extraction.posts.size());
    for (auto& p : filter_posts(std::move(extraction.posts), options.min_chars)) {
      collected.push_back(std::move(p));
    }
    if (collected.size() >= options.max_posts) break;
  }
  return cap_recent(std::move(collected), options.max_posts);
}

}  // namespace mbti
