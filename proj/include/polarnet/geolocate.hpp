#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "polarnet/common.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet {

/// Case-folds, collapses inner whitespace, and strips punctuation, emoji and
/// symbols from both ends. Letters (including non-ASCII ones) are kept.
std::string normalize_location(std::string_view raw);

/// Place-name lookup table plus a stoplist of known non-locations.
class Gazetteer {
 public:
  void add_place(std::string_view name, CountryCode country);
  void add_stopword(std::string_view term);

  std::optional<CountryCode> lookup(std::string_view normalized) const;
  bool is_stopword(std::string_view normalized) const;
  std::size_t size() const { return places_.size(); }

  /// Gazetteer: "name<TAB>country_code"; stoplist: one term per line.
  static Gazetteer load(const std::filesystem::path& gazetteer, const std::optional<std::filesystem::path>& stoplist);

 private:
  std::unordered_map<std::string, CountryCode> places_;
  std::unordered_set<std::string> stoplist_;
};

/// Resolves a free-text profile location. Any stoplisted segment rejects the
/// whole string; otherwise the longest comma segment found in the gazetteer
/// wins, the rightmost one on equal length.
std::optional<CountryCode> match_location(std::string_view raw, const Gazetteer& gazetteer);

struct GeoExclusion {
  std::string user_id;
  std::string reason;  // "country-change" or "manual"
};

/// A user receiving more than half of the retweets from one country to
/// another in a period; reported for manual inspection.
struct GeoFlag {
  std::string user_id;
  std::string period;
  CountryCode retweeting_country;
  CountryCode retweeted_country;
  double share = 0.0;
};

struct UserGeo {
  UserCountries countries;
  std::vector<GeoExclusion> excluded;  // sorted by user_id
  std::vector<GeoFlag> flagged;        // sorted by (period order, countries, user)
};

struct PeriodEvents {
  std::string period;
  std::vector<TweetEvent> events;
};

/// Per period, each user's latest profile location decides the country;
/// users resolving to two or more countries across periods are excluded, as
/// are users listed in `manual_exclusions`.
UserGeo assign_countries(std::span<const PeriodEvents> events_by_period, const Gazetteer& gazetteer,
                         const std::set<std::string>& manual_exclusions = {});

/// Countries with strictly more than `min_users` distinct geolocated active
/// users in every period.
std::set<CountryCode> eligible_countries(const UserGeo& geo, std::span<const PeriodEvents> events_by_period,
                                         std::size_t min_users = 2000);

std::set<std::string> load_exclusions(const std::filesystem::path& path);

}  // namespace polarnet
