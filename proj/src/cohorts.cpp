#include "polarnet/cohorts.hpp"

#include <unordered_set>

namespace polarnet {

std::string_view to_string(AccountState s) {
  switch (s) {
    case AccountState::active:
      return "active";
    case AccountState::suspended:
      return "suspended";
    case AccountState::deleted:
      return "deleted";
  }
  return "active";
}

AccountState parse_account_state(std::string_view text) {
  const auto t = to_lower_ascii(trim(text));
  if (t == "active") return AccountState::active;
  if (t == "suspended") return AccountState::suspended;
  if (t == "deleted") return AccountState::deleted;
  throw FormatError("unknown account status '" + std::string(text) + "'");
}

AccountStatus AccountStatus::load(const std::filesystem::path& path) {
  AccountStatus s;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() < 2 || parts.size() > 3) throw FormatError("status line must be user_id<TAB>status: " + line);
    const auto user = std::string(trim(parts[0]));
    s.state[user] = parse_account_state(parts[1]);
    if (parts.size() == 3 && !trim(parts[2]).empty()) {
      auto date = std::string(trim(parts[2]));
      if (date.size() == 10) date += "T00:00:00Z";
      s.last_tweet[user] = parse_timestamp(date);
    }
  }
  return s;
}

bool is_youtube(std::string_view domain) {
  static const DomainList youtube = [] {
    DomainList l;
    l.add("youtube.com");
    l.add("youtu.be");
    return l;
  }();
  return youtube.matches(domain);
}

namespace {

std::string cohort_of(const Partition& partition, std::size_t node, const std::optional<CommunityStances>& stances) {
  if (!stances) return "all";
  const auto it = stances->find(partition.community[node]);
  return it != stances->end() && it->second == Stance::A ? "A" : "O";
}

}  // namespace

std::vector<CohortStats> cohort_behavior(std::span<const TweetEvent> events, const Partition& partition,
                                         const std::optional<CommunityStances>& stances, const DomainList& domains,
                                         const ShortenerMap* shorteners) {
  std::unordered_map<std::string, std::string> user_cohort;
  std::map<std::string, CohortStats> stats;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    auto cohort = cohort_of(partition, i, stances);
    auto& s = stats[cohort];
    s.cohort = cohort;
    ++s.n_users;
    user_cohort.emplace(partition.nodes[i], std::move(cohort));
  }
  std::map<std::string, UrlShareCounts> shares;
  std::map<std::string, double> retweets;
  std::map<std::string, double> urls;
  std::map<std::string, double> youtube;
  for (const auto& e : events) {
    const auto it = user_cohort.find(e.user_id);
    if (it == user_cohort.end()) continue;
    const auto& cohort = it->second;
    if (e.is_retweet()) retweets[cohort] += 1.0;
    auto& sc = shares[cohort];
    for (const auto& url : e.urls) {
      const auto resolved = shorteners ? shorteners->resolve(url) : std::string_view(url);
      const auto domain = try_extract_domain(resolved);
      urls[cohort] += 1.0;
      if (!domain) continue;
      ++sc.shares;
      if (domains.matches(*domain)) ++sc.lowcred_shares;
      if (is_youtube(*domain)) youtube[cohort] += 1.0;
    }
  }
  std::vector<CohortStats> out;
  for (auto& [cohort, s] : stats) {
    const auto n = static_cast<double>(s.n_users);
    s.avg_retweets = retweets[cohort] / n;
    s.avg_urls = urls[cohort] / n;
    s.avg_youtube_urls = youtube[cohort] / n;
    s.lowcred_fraction = shares[cohort].fraction();
    out.push_back(s);
  }
  return out;
}

std::unordered_map<std::string, Timestamp> last_tweet_times(std::span<const TweetEvent> corpus) {
  std::unordered_map<std::string, Timestamp> last;
  for (const auto& e : corpus) {
    auto [it, inserted] = last.try_emplace(e.user_id, e.timestamp);
    if (!inserted && it->second < e.timestamp) it->second = e.timestamp;
  }
  return last;
}

SuspensionStats suspension_stats(const Partition& partition, const std::optional<CommunityStances>& stances,
                                 const AccountStatus& status,
                                 const std::unordered_map<std::string, Timestamp>& last_tweet) {
  SuspensionStats out;
  std::map<std::string, SuspensionCohort> cohorts;
  std::size_t missing = 0;
  for (std::size_t i = 0; i < partition.size(); ++i) {
    const auto& user = partition.nodes[i];
    const auto cohort = cohort_of(partition, i, stances);
    auto& c = cohorts[cohort];
    c.cohort = cohort;
    ++c.n_users;
    const auto st = status.state.find(user);
    if (st == status.state.end()) {
      ++missing;
      continue;
    }
    ++c.covered;
    if (st->second != AccountState::suspended) continue;
    ++c.suspended;
    std::optional<Timestamp> when;
    if (const auto s = status.last_tweet.find(user); s != status.last_tweet.end()) when = s->second;
    else if (const auto c2 = last_tweet.find(user); c2 != last_tweet.end()) when = c2->second;
    if (!when) {
      ++out.suspended_without_date;
      continue;
    }
    ++out.daily[format_date(*when)];
  }
  if (missing > 0) {
    out.warnings.push_back(std::to_string(missing) + " of " + std::to_string(partition.size()) +
                           " users missing from the status snapshot (treated as active)");
  }
  for (auto& [_, c] : cohorts) out.cohorts.push_back(c);
  return out;
}

}  // namespace polarnet
