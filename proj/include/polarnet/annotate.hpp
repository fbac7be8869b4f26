#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "polarnet/cluster.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet {

enum class Label { pro_vax, no_vax, other };

std::string_view to_string(Label label);
Label parse_label(std::string_view text);

struct LabelRecord {
  std::string tweet_id;
  std::string community_id;
  int round = 1;
  std::string annotator_id;
  Label label = Label::other;
};

/// Community stance: A for no-vax, O for everything else.
enum class Stance { A, O };

std::string_view to_string(Stance stance);
Stance parse_stance(std::string_view text);

struct StanceMap {
  std::map<std::string, Stance> stance;
  std::map<std::string, std::size_t> novax_labels;
};

struct LabelCounts {
  std::size_t pro_vax = 0;
  std::size_t no_vax = 0;
  std::size_t other = 0;

  /// No-vax is the strict plurality.
  bool novax_plurality() const { return no_vax > pro_vax && no_vax > other; }
};

struct SampleItem {
  std::uint32_t community = 0;
  std::string tweet_id;
};

/// For every community holding more than `min_frac` of the partition's
/// nodes, `n` distinct tweets authored by its members, drawn uniformly
/// (all of them when fewer exist). Deterministic for a given seed.
std::vector<SampleItem> sample_round1(const Partition& partition, std::span<const TweetEvent> events, std::size_t n,
                                      double min_frac, std::uint64_t seed);

/// Retweet count of each tweet id within `events`.
std::map<std::string, std::size_t> tweet_popularity(std::span<const TweetEvent> events);

/// For each community whose round-1 labels have a no-vax plurality, its `top`
/// most retweeted original tweets after removing the `exclude_top` most
/// retweeted tweets of the whole network. Ties go to the smaller tweet id.
std::vector<SampleItem> sample_round2(const Partition& partition, std::span<const TweetEvent> events,
                                      const std::map<std::uint32_t, LabelCounts>& round1_counts, std::size_t top = 10,
                                      std::size_t exclude_top = 50);

/// Cohen's kappa for two aligned categorical label vectors.
/// Throws on length mismatch, empty input, or degenerate marginals (p_e = 1).
double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b);

enum class KappaMode {
  three_class,
  pro_vs_novax,  // items both annotators labelled pro-vax or no-vax
};

double cohen_kappa(std::span<const Label> a, std::span<const Label> b, KappaMode mode = KappaMode::three_class);

/// Per community label counts for one round (0 = all rounds).
std::map<std::string, LabelCounts> count_labels(std::span<const LabelRecord> records, int round = 0);

/// A iff the community has more than `threshold` no-vax labels over both
/// rounds and all annotators.
StanceMap classify_communities(std::span<const LabelRecord> records, std::size_t threshold = 10);

/// "tweet_id<TAB>community_id<TAB>round<TAB>annotator_id<TAB>label".
std::vector<LabelRecord> load_labels(const std::filesystem::path& path);
void save_labels(const std::filesystem::path& path, std::span<const LabelRecord> records);

/// "community_id<TAB>stance<TAB>novax_labels".
void save_stance_map(const std::filesystem::path& path, const StanceMap& map, std::string_view comment = {});
StanceMap load_stance_map(const std::filesystem::path& path);

/// Text with tabs and line breaks replaced by spaces, for TSV output.
std::string tsv_safe(std::string_view text);

}  // namespace polarnet
