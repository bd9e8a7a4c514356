#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <thread>

#include "mbti/corpus.hpp"
#include "mbti/text.hpp"

namespace mbti {

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

// Splits "https://host:port/path" into origin and path.
std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("URL without scheme: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

struct HttpFetcher::Impl {
  HttpFetcherOptions options;
  std::string origin;
  std::unique_ptr<httplib::Client> client;
  std::optional<std::vector<std::string>> disallow;
  std::chrono::steady_clock::time_point last_request{};

  httplib::Result get(const std::string& path) {
    const auto now = std::chrono::steady_clock::now();
    const auto ready = last_request + options.delay;
    if (now < ready) std::this_thread::sleep_for(ready - now);
    last_request = std::chrono::steady_clock::now();
    return client->Get(path);
  }

  const std::vector<std::string>& robots() {
    if (!disallow) {
      auto res = get("/robots.txt");
      disallow = (res && res->status == 200)
                     ? parse_robots_disallow(res->body, options.user_agent)
                     : std::vector<std::string>{};
    }
    return *disallow;
  }
};

HttpFetcher::HttpFetcher(HttpFetcherOptions options) : impl_(std::make_unique<Impl>()) {
  if (options.url_template.find("{page}") == std::string::npos) {
    throw ValidationError("URL template must contain {page}");
  }
  impl_->options = std::move(options);
  impl_->origin = split_url(impl_->options.url_template).first;
  impl_->client = std::make_unique<httplib::Client>(impl_->origin);
  impl_->client->set_follow_location(true);
  impl_->client->set_default_headers({{"User-Agent", impl_->options.user_agent}});
  impl_->client->set_connection_timeout(std::chrono::seconds(10));
  impl_->client->set_read_timeout(std::chrono::seconds(30));
}

HttpFetcher::~HttpFetcher() = default;

std::optional<PageFetcher::Page> HttpFetcher::fetch_page(MbtiType section, int page) {
  if (page > impl_->options.max_pages) return std::nullopt;
  std::string url = replace_all(impl_->options.url_template, "{type}", text::to_lower(section.str()));
  url = replace_all(url, "{page}", std::to_string(page));
  const auto path = split_url(url).second;
  if (!robots_allows(impl_->robots(), path)) return std::nullopt;
  auto res = impl_->get(path);
  if (!res) throw Error("request failed for " + url + ": " + httplib::to_string(res.error()));
  if (res->status == 404) return std::nullopt;
  if (res->status != 200) throw Error("HTTP " + std::to_string(res->status) + " for " + url);
  return Page{res->body, url};
}

}  // namespace mbti
