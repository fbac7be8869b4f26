#include "polarnet/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "polarnet/lowcred.hpp"

namespace polarnet {

namespace {

using nlohmann::json;

const std::set<std::string, std::less<>> kRequiredKeys = {"tweet_id", "user_id", "timestamp", "lang", "text", "urls"};
const std::set<std::string, std::less<>> kOptionalKeys = {"retweeted_user_id", "retweeted_tweet_id",
                                                          "profile_location"};

std::string required_string(const json& obj, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw FormatError(std::string(key) + " is not a string");
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw FormatError(std::string(key) + " is not a string");
  return it->get<std::string>();
}

TweetEvent event_from_json(const json& obj) {
  if (!obj.is_object()) throw FormatError("record is not an object");
  for (const auto& [key, _] : obj.items()) {
    if (!kRequiredKeys.contains(key) && !kOptionalKeys.contains(key)) throw FormatError("unknown key " + key);
  }
  for (const auto& key : kRequiredKeys) {
    if (!obj.contains(key)) throw FormatError("missing key " + key);
  }
  TweetEvent e;
  e.tweet_id = required_string(obj, "tweet_id");
  e.user_id = required_string(obj, "user_id");
  e.timestamp = parse_timestamp(required_string(obj, "timestamp"));
  e.lang = required_string(obj, "lang");
  e.text = required_string(obj, "text");
  e.retweeted_user_id = optional_string(obj, "retweeted_user_id");
  e.retweeted_tweet_id = optional_string(obj, "retweeted_tweet_id");
  e.profile_location = optional_string(obj, "profile_location");
  const auto& urls = obj.at("urls");
  if (!urls.is_array()) throw FormatError("urls is not an array");
  for (const auto& u : urls) {
    if (!u.is_string()) throw FormatError("url is not a string");
    e.urls.push_back(u.get<std::string>());
  }
  validate_event(e);
  return e;
}

bool is_word_char(unsigned char c) { return c >= 0x80 || std::isalnum(c) || c == '_'; }

bool keyword_in(const std::vector<std::string>& tokens, const std::vector<std::vector<std::string>>& keywords) {
  for (const auto& kw : keywords) {
    if (kw.empty() || kw.size() > tokens.size()) continue;
    for (std::size_t i = 0; i + kw.size() <= tokens.size(); ++i) {
      if (std::equal(kw.begin(), kw.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
    }
  }
  return false;
}

}  // namespace

void validate_event(const TweetEvent& e) {
  if (e.tweet_id.empty()) throw FormatError("empty tweet_id");
  if (e.user_id.empty()) throw FormatError("empty user_id");
  if (e.retweeted_user_id.has_value() != e.retweeted_tweet_id.has_value())
    throw FormatError("retweeted_user_id and retweeted_tweet_id must appear together");
  if (e.retweeted_user_id && (e.retweeted_user_id->empty() || e.retweeted_tweet_id->empty()))
    throw FormatError("empty retweet reference");
  for (const auto& u : e.urls) {
    if (!try_extract_domain(u)) throw FormatError("url without host: " + u);
  }
}

ParseResult parse_events(std::istream& in) {
  if (!in) throw IoError("event stream is not readable");
  ParseResult result;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.lines;
    try {
      auto e = event_from_json(json::parse(line));
      if (!seen_ids.insert(e.tweet_id).second) throw FormatError("duplicate tweet_id " + e.tweet_id);
      result.events.push_back(std::move(e));
    } catch (const json::exception& ex) {
      result.rejects.push_back({line_no, std::string("json: ") + ex.what()});
    } catch (const FormatError& ex) {
      result.rejects.push_back({line_no, ex.what()});
    }
  }
  if (in.bad()) throw IoError("read failure on event stream");
  if (result.lines > 0 && 2 * result.rejects.size() > result.lines) {
    throw FormatError("more than half of the records are malformed (" + std::to_string(result.rejects.size()) + " of " +
                      std::to_string(result.lines) + "); first: line " + std::to_string(result.rejects.front().line) +
                      ": " + result.rejects.front().reason);
  }
  return result;
}

ParseResult parse_events_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_events(in);
}

std::string serialize_event(const TweetEvent& e) {
  // ordered_json keeps a fixed key order so serialized logs are byte-stable.
  nlohmann::ordered_json obj;
  obj["tweet_id"] = e.tweet_id;
  obj["user_id"] = e.user_id;
  obj["timestamp"] = format_timestamp(e.timestamp);
  obj["lang"] = e.lang;
  obj["text"] = e.text;
  if (e.retweeted_user_id) {
    obj["retweeted_user_id"] = *e.retweeted_user_id;
    obj["retweeted_tweet_id"] = *e.retweeted_tweet_id;
  }
  obj["urls"] = e.urls;
  if (e.profile_location) obj["profile_location"] = *e.profile_location;
  return obj.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace);
}

void write_events(std::ostream& out, std::span<const TweetEvent> events) {
  for (const auto& e : events) out << serialize_event(e) << '\n';
}

void write_events_file(const std::filesystem::path& path, std::span<const TweetEvent> events) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_events(out, events);
  if (!out) throw IoError("write failure on " + path.string());
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    const std::string_view chunk = text.substr(i, j - i);
    i = j;
    if (chunk.empty() || chunk.front() == '@') continue;
    if (chunk.find("://") != std::string_view::npos) continue;
    if (chunk.size() >= 4 && to_lower_ascii(chunk.substr(0, 4)) == "www.") continue;
    std::string current;
    for (char c : chunk) {
      if (is_word_char(static_cast<unsigned char>(c))) {
        current.push_back(c);
      } else if (!current.empty()) {
        tokens.push_back(to_lower_ascii(current));
        current.clear();
      }
    }
    if (!current.empty()) tokens.push_back(to_lower_ascii(current));
  }
  return tokens;
}

std::vector<TweetEvent> filter_keywords(std::span<const TweetEvent> events, const KeywordSet& keywords,
                                        std::string_view reference_lang) {
  std::map<std::string, std::vector<std::vector<std::string>>, std::less<>> tokenized;
  for (const auto& [lang, words] : keywords) {
    auto& list = tokenized[lang];
    for (const auto& w : words) list.push_back(tokenize(w));
  }
  const auto ref = tokenized.find(reference_lang);

  std::vector<TweetEvent> kept;
  for (const auto& e : events) {
    const auto tokens = tokenize(e.text);
    bool hit = false;
    if (const auto own = tokenized.find(e.lang); own != tokenized.end()) hit = keyword_in(tokens, own->second);
    if (!hit && ref != tokenized.end()) hit = keyword_in(tokens, ref->second);
    if (hit) kept.push_back(e);
  }
  return kept;
}

std::vector<TweetEvent> slice_period(std::span<const TweetEvent> events, const Period& period) {
  std::vector<TweetEvent> kept;
  for (const auto& e : events)
    if (period.contains(e.timestamp)) kept.push_back(e);
  return kept;
}

std::string dominant_language(std::span<const TweetEvent> events, const CountryCode& country,
                              const UserCountries& user_geo, const std::set<std::string>& spoken_langs) {
  std::map<std::string, std::size_t> counts;
  std::size_t in_country = 0;
  for (const auto& e : events) {
    const auto it = user_geo.find(e.user_id);
    if (it == user_geo.end() || it->second != country) continue;
    ++in_country;
    if (spoken_langs.contains(e.lang)) ++counts[e.lang];
  }
  if (in_country == 0) throw InvalidArgument("no events for country " + country);
  if (counts.empty()) throw InvalidArgument("no spoken language of " + country + " present in the data");
  // std::map iterates lexicographically, so strict > keeps the smaller code on ties.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

KeywordSet load_keywords(const std::filesystem::path& path) {
  KeywordSet set;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 2) throw FormatError("keyword line must be lang<TAB>keyword: " + line);
    const auto lang = std::string(trim(parts[0]));
    const auto kw = to_lower_ascii(trim(parts[1]));
    if (lang.empty() || kw.empty()) throw FormatError("empty keyword field: " + line);
    set[lang].insert(kw);
  }
  return set;
}

Period make_period(std::string name, std::string_view start, std::string_view end) {
  Period p{std::move(name), parse_timestamp(start), parse_timestamp(end)};
  if (p.name.empty()) throw FormatError("period without name");
  if (!(p.start < p.end)) throw FormatError("period " + p.name + " does not satisfy start < end");
  return p;
}

std::vector<Period> load_periods(const std::filesystem::path& path) {
  std::vector<Period> periods;
  std::set<std::string> names;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 3) throw FormatError("period line must be name<TAB>start<TAB>end: " + line);
    auto p = make_period(std::string(trim(parts[0])), parts[1], parts[2]);
    if (!names.insert(p.name).second) throw FormatError("duplicate period " + p.name);
    periods.push_back(std::move(p));
  }
  return periods;
}

}  // namespace polarnet
