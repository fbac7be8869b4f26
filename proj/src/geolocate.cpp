#include "polarnet/geolocate.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <tuple>

namespace polarnet {

namespace {

// Decodes the code point starting at `pos`; returns {code point, byte length}.
// Invalid sequences are treated as single bytes.
std::pair<char32_t, std::size_t> decode_at(std::string_view s, std::size_t pos) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 1;
  if (pos + len > s.size()) return {b0, 1};
  if (len == 1) return {b0, 1};
  char32_t cp = b0 & (0x7F >> len);
  for (std::size_t i = 1; i < len; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return {b0, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

// Start offset of the last code point in a non-empty string.
std::size_t last_cp_start(std::string_view s) {
  std::size_t pos = s.size() - 1;
  while (pos > 0 && (static_cast<unsigned char>(s[pos]) & 0xC0) == 0x80 && s.size() - pos < 4) --pos;
  return pos;
}

bool is_edge_junk(char32_t cp) {
  if (cp < 0x80) return !std::isalnum(static_cast<int>(cp));
  return (cp >= 0x2000 && cp <= 0x2BFF)     // punctuation, arrows, symbols, dingbats
         || (cp >= 0x3000 && cp <= 0x303F)  // CJK punctuation
         || (cp >= 0xFE00 && cp <= 0xFE0F)  // variation selectors
         || cp >= 0x1F000                   // emoji and pictographs
         || cp == 0xA0 || cp == 0xB7;
}

std::string strip_edges(std::string_view s) {
  while (!s.empty()) {
    const auto [cp, len] = decode_at(s, 0);
    if (!is_edge_junk(cp)) break;
    s.remove_prefix(len);
  }
  while (!s.empty()) {
    const auto start = last_cp_start(s);
    const auto [cp, len] = decode_at(s, start);
    if (start + len != s.size()) {  // malformed tail byte
      s.remove_suffix(1);
      continue;
    }
    if (!is_edge_junk(cp)) break;
    s.remove_suffix(len);
  }
  return std::string(s);
}

}  // namespace

std::string normalize_location(std::string_view raw) {
  std::string folded = to_lower_ascii(raw);
  std::string collapsed;
  bool pending_space = false;
  for (char c : folded) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(' ');
    pending_space = false;
    collapsed.push_back(c);
  }
  return strip_edges(collapsed);
}

void Gazetteer::add_place(std::string_view name, CountryCode country) {
  auto key = normalize_location(name);
  if (key.empty()) throw InvalidArgument("empty gazetteer name");
  places_[std::move(key)] = std::move(country);
}

void Gazetteer::add_stopword(std::string_view term) {
  auto key = normalize_location(term);
  if (!key.empty()) stoplist_.insert(std::move(key));
}

std::optional<CountryCode> Gazetteer::lookup(std::string_view normalized) const {
  const auto it = places_.find(std::string(normalized));
  if (it == places_.end()) return std::nullopt;
  return it->second;
}

bool Gazetteer::is_stopword(std::string_view normalized) const { return stoplist_.contains(std::string(normalized)); }

Gazetteer Gazetteer::load(const std::filesystem::path& gazetteer, const std::optional<std::filesystem::path>& stoplist) {
  Gazetteer g;
  for (const auto& line : read_data_lines(gazetteer)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 2) throw FormatError("gazetteer line must be name<TAB>country_code: " + line);
    const auto cc = std::string(trim(parts[1]));
    if (cc.size() != 2) throw FormatError("country code must have two letters: " + line);
    g.add_place(parts[0], cc);
  }
  if (stoplist) {
    for (const auto& line : read_data_lines(*stoplist)) g.add_stopword(line);
  }
  return g;
}

std::optional<CountryCode> match_location(std::string_view raw, const Gazetteer& gazetteer) {
  const auto normalized = normalize_location(raw);
  if (normalized.empty() || gazetteer.is_stopword(normalized)) return std::nullopt;

  std::vector<std::string> segments;
  for (const auto part : split(normalized, ',')) {
    auto seg = normalize_location(part);
    if (seg.empty()) continue;
    if (gazetteer.is_stopword(seg)) return std::nullopt;
    segments.push_back(std::move(seg));
  }

  std::optional<CountryCode> best;
  std::size_t best_len = 0;
  for (const auto& seg : segments) {
    if (seg.size() < best_len) continue;
    if (auto cc = gazetteer.lookup(seg)) {
      best = std::move(cc);  // >= keeps the rightmost on ties
      best_len = seg.size();
    }
  }
  return best;
}

UserGeo assign_countries(std::span<const PeriodEvents> events_by_period, const Gazetteer& gazetteer,
                         const std::set<std::string>& manual_exclusions) {
  // user -> distinct countries across periods
  std::map<std::string, std::set<CountryCode>> resolved;
  for (const auto& pe : events_by_period) {
    std::unordered_map<std::string, const TweetEvent*> latest;
    for (const auto& e : pe.events) {
      if (!e.profile_location) continue;
      auto& slot = latest[e.user_id];
      if (slot == nullptr || slot->timestamp <= e.timestamp) slot = &e;
    }
    for (const auto& [user, event] : latest) {
      if (auto cc = match_location(*event->profile_location, gazetteer)) resolved[user].insert(*cc);
    }
  }

  UserGeo geo;
  for (auto& [user, countries] : resolved) {
    if (countries.size() >= 2) {
      geo.excluded.push_back({user, "country-change"});
    } else if (manual_exclusions.contains(user)) {
      geo.excluded.push_back({user, "manual"});
    } else {
      geo.countries.emplace(user, *countries.begin());
    }
  }

  for (const auto& pe : events_by_period) {
    // (retweeting country, retweeted country) -> retweeted user -> count
    std::map<std::pair<CountryCode, CountryCode>, std::map<std::string, std::size_t>> flows;
    for (const auto& e : pe.events) {
      if (!e.is_retweet()) continue;
      const auto src = geo.countries.find(e.user_id);
      const auto dst = geo.countries.find(*e.retweeted_user_id);
      if (src == geo.countries.end() || dst == geo.countries.end() || src->second == dst->second) continue;
      ++flows[{src->second, dst->second}][*e.retweeted_user_id];
    }
    for (const auto& [pair, per_user] : flows) {
      std::size_t total = 0;
      for (const auto& [_, n] : per_user) total += n;
      for (const auto& [user, n] : per_user) {
        if (2 * n > total) {
          geo.flagged.push_back(
              {user, pe.period, pair.first, pair.second, static_cast<double>(n) / static_cast<double>(total)});
        }
      }
    }
  }
  return geo;
}

std::set<CountryCode> eligible_countries(const UserGeo& geo, std::span<const PeriodEvents> events_by_period,
                                         std::size_t min_users) {
  if (min_users < 1) throw InvalidArgument("min_users must be at least 1");
  std::set<CountryCode> eligible;
  bool first = true;
  for (const auto& pe : events_by_period) {
    std::map<CountryCode, std::unordered_set<std::string>> active;
    for (const auto& e : pe.events) {
      if (const auto it = geo.countries.find(e.user_id); it != geo.countries.end()) active[it->second].insert(e.user_id);
    }
    std::set<CountryCode> here;
    for (const auto& [cc, users] : active)
      if (users.size() > min_users) here.insert(cc);
    if (first) {
      eligible = std::move(here);
      first = false;
    } else {
      std::erase_if(eligible, [&](const CountryCode& cc) { return !here.contains(cc); });
    }
  }
  return eligible;
}

std::set<std::string> load_exclusions(const std::filesystem::path& path) {
  std::set<std::string> users;
  for (const auto& line : read_data_lines(path)) users.insert(std::string(trim(line)));
  return users;
}

}  // namespace polarnet
