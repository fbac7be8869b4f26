#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polarnet/common.hpp"

namespace polarnet {

/// One post or retweet from a normalized event log.
struct TweetEvent {
  std::string tweet_id;
  std::string user_id;
  Timestamp timestamp{};
  std::string lang;
  std::string text;
  // Both set for retweets, both empty otherwise.
  std::optional<std::string> retweeted_user_id;
  std::optional<std::string> retweeted_tweet_id;
  std::vector<std::string> urls;
  std::optional<std::string> profile_location;

  bool is_retweet() const { return retweeted_user_id.has_value(); }
  bool operator==(const TweetEvent&) const = default;
};

/// Half-open time window [start, end).
struct Period {
  std::string name;
  Timestamp start{};
  Timestamp end{};

  bool contains(Timestamp t) const { return start <= t && t < end; }
};

/// Lowercase keywords per language code.
using KeywordSet = std::map<std::string, std::set<std::string>>;

struct ParseReject {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct ParseResult {
  std::vector<TweetEvent> events;
  std::size_t lines = 0;  // non-blank lines seen
  std::vector<ParseReject> rejects;
};

/// Parses newline-delimited JSON records. Malformed lines are skipped and
/// recorded; more than half malformed raises FormatError, a failed stream IoError.
ParseResult parse_events(std::istream& in);
ParseResult parse_events_file(const std::filesystem::path& path);

/// Validates a record, throwing FormatError with the first violated rule.
void validate_event(const TweetEvent& e);

std::string serialize_event(const TweetEvent& e);
void write_events(std::ostream& out, std::span<const TweetEvent> events);
void write_events_file(const std::filesystem::path& path, std::span<const TweetEvent> events);

/// Case-folded word tokens of a post; URLs and @mentions are skipped, '#' is stripped.
std::vector<std::string> tokenize(std::string_view text);

/// Keeps events whose text contains a keyword of their language or of the
/// reference language. Multi-word keywords match consecutive tokens.
std::vector<TweetEvent> filter_keywords(std::span<const TweetEvent> events, const KeywordSet& keywords,
                                        std::string_view reference_lang = "en");

std::vector<TweetEvent> slice_period(std::span<const TweetEvent> events, const Period& period);

/// Most frequent event language among users of `country`, restricted to
/// `spoken_langs`; ties go to the lexicographically smaller code.
std::string dominant_language(std::span<const TweetEvent> events, const CountryCode& country,
                              const UserCountries& user_geo, const std::set<std::string>& spoken_langs);

/// "lang<TAB>keyword" per line.
KeywordSet load_keywords(const std::filesystem::path& path);
/// "name<TAB>start<TAB>end" per line.
std::vector<Period> load_periods(const std::filesystem::path& path);
Period make_period(std::string name, std::string_view start, std::string_view end);

}  // namespace polarnet
