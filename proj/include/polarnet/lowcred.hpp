#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

namespace polarnet {

struct TweetEvent;

/// Host of a URL: lowercased, port and userinfo removed, one leading "www."
/// stripped. Accepts scheme-less "host/path" only when the host contains a dot.
/// Throws InvalidArgument when there is no host.
std::string extract_domain(std::string_view url);
std::optional<std::string> try_extract_domain(std::string_view url);

/// URL identity used for co-sharing: scheme and fragment removed, host lowercased.
std::string normalize_url(std::string_view url);

/// Set of low-credibility registrable domains with the list each came from.
class DomainList {
 public:
  DomainList() = default;

  void add(std::string_view domain, std::string source = {});
  bool contains(std::string_view domain) const { return domains_.contains(std::string(domain)); }
  std::size_t size() const { return domains_.size(); }
  const std::map<std::string, std::string>& entries() const { return domains_; }

  /// True iff `domain` is listed or is a subdomain of a listed entry.
  bool matches(std::string_view domain) const;

  /// One domain per line, '#' comments, optional "<TAB>source".
  static DomainList load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::string> domains_;  // domain -> source tag
};

inline bool is_lowcred(std::string_view domain, const DomainList& list) { return list.matches(domain); }

/// short_url -> resolved_url, applied before domain extraction.
class ShortenerMap {
 public:
  void add(std::string short_url, std::string resolved) { map_[std::move(short_url)] = std::move(resolved); }
  std::string_view resolve(std::string_view url) const;
  bool empty() const { return map_.empty(); }
  static ShortenerMap load(const std::filesystem::path& path);

 private:
  std::unordered_map<std::string, std::string> map_;
};

struct UrlShareCounts {
  std::size_t shares = 0;          // URL occurrences with an extractable domain
  std::size_t lowcred_shares = 0;  // of which hit the list

  std::optional<double> fraction() const {
    if (shares == 0) return std::nullopt;
    return static_cast<double>(lowcred_shares) / static_cast<double>(shares);
  }
};

UrlShareCounts count_lowcred_shares(std::span<const TweetEvent> events, const DomainList& list,
                                    const ShortenerMap* shorteners = nullptr);

/// Share occurrences hitting the list over all share occurrences; nullopt when no URLs.
std::optional<double> lowcred_fraction(std::span<const TweetEvent> events, const DomainList& list,
                                       const ShortenerMap* shorteners = nullptr);

}  // namespace polarnet
