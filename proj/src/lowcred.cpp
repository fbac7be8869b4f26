#include "polarnet/lowcred.hpp"

#include "polarnet/common.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet {

namespace {

struct UrlParts {
  std::string_view scheme;  // empty when absent
  std::string_view host;    // raw authority host, may carry port or userinfo
  std::string_view rest;    // path + query + fragment
};

UrlParts split_url(std::string_view url) {
  UrlParts parts;
  url = trim(url);
  std::string_view after = url;
  if (const auto pos = url.find("://"); pos != std::string_view::npos) {
    parts.scheme = url.substr(0, pos);
    after = url.substr(pos + 3);
  }
  const auto end = after.find_first_of("/?#");
  parts.host = after.substr(0, end);
  parts.rest = end == std::string_view::npos ? std::string_view{} : after.substr(end);
  return parts;
}

std::string clean_host(std::string_view authority) {
  if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
  if (!authority.empty() && authority.front() == '[') {
    const auto close = authority.find(']');
    authority = authority.substr(0, close == std::string_view::npos ? authority.size() : close + 1);
  } else if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
    authority = authority.substr(0, colon);
  }
  while (!authority.empty() && authority.back() == '.') authority.remove_suffix(1);
  return to_lower_ascii(authority);
}

}  // namespace

std::optional<std::string> try_extract_domain(std::string_view url) {
  const auto parts = split_url(url);
  std::string host = clean_host(parts.host);
  if (host.empty()) return std::nullopt;
  if (parts.scheme.empty() && host.find('.') == std::string::npos) return std::nullopt;
  if (host.find_first_of(" \t") != std::string::npos) return std::nullopt;
  if (host.rfind("www.", 0) == 0 && host.size() > 4) host.erase(0, 4);
  return host;
}

std::string extract_domain(std::string_view url) {
  auto d = try_extract_domain(url);
  if (!d) throw InvalidArgument("URL has no host: " + std::string(url));
  return *std::move(d);
}

std::string normalize_url(std::string_view url) {
  auto parts = split_url(url);
  std::string_view rest = parts.rest;
  if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
  std::string out = to_lower_ascii(parts.host);
  out.append(rest);
  return out;
}

void DomainList::add(std::string_view domain, std::string source) {
  domains_[extract_domain(domain)] = std::move(source);
}

bool DomainList::matches(std::string_view domain) const {
  if (domains_.empty()) return false;
  std::string_view d = domain;
  while (true) {
    if (domains_.contains(std::string(d))) return true;
    const auto dot = d.find('.');
    if (dot == std::string_view::npos) return false;
    d.remove_prefix(dot + 1);
  }
}

DomainList DomainList::load(const std::filesystem::path& path) {
  DomainList list;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    const auto domain = trim(parts[0]);
    if (domain.empty()) continue;
    list.add(domain, parts.size() > 1 ? std::string(trim(parts[1])) : std::string{});
  }
  return list;
}

std::string_view ShortenerMap::resolve(std::string_view url) const {
  if (map_.empty()) return url;
  const auto it = map_.find(std::string(url));
  return it == map_.end() ? url : std::string_view(it->second);
}

ShortenerMap ShortenerMap::load(const std::filesystem::path& path) {
  ShortenerMap m;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 2) throw FormatError("shortener line must be short_url<TAB>resolved_url: " + line);
    m.add(std::string(trim(parts[0])), std::string(trim(parts[1])));
  }
  return m;
}

UrlShareCounts count_lowcred_shares(std::span<const TweetEvent> events, const DomainList& list,
                                    const ShortenerMap* shorteners) {
  UrlShareCounts counts;
  for (const auto& e : events) {
    for (const auto& url : e.urls) {
      const auto resolved = shorteners ? shorteners->resolve(url) : std::string_view(url);
      const auto domain = try_extract_domain(resolved);
      if (!domain) continue;
      ++counts.shares;
      if (list.matches(*domain)) ++counts.lowcred_shares;
    }
  }
  return counts;
}

std::optional<double> lowcred_fraction(std::span<const TweetEvent> events, const DomainList& list,
                                       const ShortenerMap* shorteners) {
  return count_lowcred_shares(events, list, shorteners).fraction();
}

}  // namespace polarnet
