#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polarnet/annotate.hpp"
#include "polarnet/cluster.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/lowcred.hpp"

namespace polarnet {

enum class AccountState { active, suspended, deleted };

std::string_view to_string(AccountState s);
AccountState parse_account_state(std::string_view text);

/// Snapshot of account statuses; users missing from it count as active.
struct AccountStatus {
  std::unordered_map<std::string, AccountState> state;
  std::unordered_map<std::string, Timestamp> last_tweet;  // optional third column

  /// "user_id<TAB>status[<TAB>last_tweet_date]".
  static AccountStatus load(const std::filesystem::path& path);
};

/// Stance of each community index of one network.
using CommunityStances = std::map<std::uint32_t, Stance>;

struct CohortStats {
  std::string cohort;  // "A", "O" or "all"
  std::size_t n_users = 0;
  double avg_retweets = 0.0;
  double avg_urls = 0.0;
  double avg_youtube_urls = 0.0;
  std::optional<double> lowcred_fraction;
};

bool is_youtube(std::string_view domain);

/// Per-user averages for the A and O cohorts of a network, or one "all"
/// cohort when no stance information is available.
std::vector<CohortStats> cohort_behavior(std::span<const TweetEvent> events, const Partition& partition,
                                         const std::optional<CommunityStances>& stances, const DomainList& domains,
                                         const ShortenerMap* shorteners = nullptr);

struct SuspensionCohort {
  std::string cohort;
  std::size_t n_users = 0;
  std::size_t suspended = 0;
  std::size_t covered = 0;  // users present in the status snapshot
  double proportion() const { return n_users == 0 ? 0.0 : static_cast<double>(suspended) / static_cast<double>(n_users); }
};

struct SuspensionStats {
  std::vector<SuspensionCohort> cohorts;
  std::map<std::string, std::size_t> daily;  // last-tweet date -> suspended users
  std::size_t suspended_without_date = 0;
  std::vector<std::string> warnings;
};

/// Last tweet time per user over the whole corpus.
std::unordered_map<std::string, Timestamp> last_tweet_times(std::span<const TweetEvent> corpus);

SuspensionStats suspension_stats(const Partition& partition, const std::optional<CommunityStances>& stances,
                                 const AccountStatus& status,
                                 const std::unordered_map<std::string, Timestamp>& last_tweet);

}  // namespace polarnet
