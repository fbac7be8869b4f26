#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polarnet/annotate.hpp"
#include "polarnet/cluster.hpp"
#include "polarnet/config.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet {

struct SbmSpec {
  std::vector<std::size_t> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
  double weight_mean = 1.0;  // geometric weights on {1, 2, ...}
  std::uint64_t seed = 1;

  void validate() const;
};

/// Undirected planted-partition graph. Nodes are "v000000", "v000001", ...
/// numbered block by block, isolated nodes included.
WeightedGraph sbm_generate(const SbmSpec& spec);
/// Block membership of the nodes of sbm_generate(spec).
Partition sbm_truth(const SbmSpec& spec);

struct CommunitySpec {
  Stance stance = Stance::O;
  double share = 1.0;  // fraction of the country's users
};

struct CountrySpec {
  CountryCode code;
  std::string lang;
  std::size_t users = 0;
  std::vector<CommunitySpec> communities;
};

struct CorpusSpec {
  std::vector<CountrySpec> countries;
  std::vector<Period> periods;
  std::uint64_t seed = 1;

  double originals_per_user = 3.0;  // mean per period, at least one each
  double retweets_per_user = 30.0;  // mean per period
  double p_intra = 0.98;            // within-country retweets staying in the own community
  double cross_border = 0.02;       // probability that a retweet targets another country
  double aa_multiplier = 10.0;      // scales cross_border for A users, who retweet A users abroad
  double url_rate_a = 0.8;          // probability an original carries a URL
  double url_rate_o = 0.3;
  double lowcred_rate_a = 0.26;  // per URL share
  double lowcred_rate_o = 0.024;
  double youtube_rate = 0.1;  // among credible URLs
  double shortener_rate = 0.05;
  double offtopic_rate = 0.05;  // originals without a keyword
  double unlocated_fraction = 0.05;
  double mover_fraction = 0.02;
  double suspend_rate_a = 0.13;
  double suspend_rate_o = 0.02;
  double popularity_alpha = 1.1;  // Pareto tail of user popularity
  std::size_t url_pool = 60;      // URLs per community and kind
  std::size_t min_users = 50;     // written into the generated pipeline config

  void validate() const;
  static CorpusSpec from_doc(const KeyValueDoc& doc);
  static CorpusSpec load(const std::filesystem::path& path);
};

struct CorpusTruth {
  UserCountries user_geo;                              // located, non-moving users
  std::map<std::string, std::string> community;        // user -> "CC:k"
  std::map<std::string, Stance> community_stance;      // "CC:k" -> stance
  std::map<std::string, std::string> status;           // user -> account status
};

struct Corpus {
  std::vector<TweetEvent> events;  // sorted by (timestamp, tweet_id)
  CorpusTruth truth;
};

Corpus synth_corpus(const CorpusSpec& spec);

/// Writes the corpus, every input file the pipeline needs (gazetteer,
/// stoplist, keywords, periods, domains, shorteners, status), the ground
/// truth under truth/ and a ready-to-run pipeline.conf.
void write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec, const Corpus& corpus);

/// Truth files written by write_corpus.
CorpusTruth load_truth(const std::filesystem::path& dir);

/// Simulated annotators for sampled tweets, labelling from the author's true stance.
struct AnnotatorModel {
  double novax_given_a = 0.7;
  double provax_given_o = 0.4;
  double novax_given_o = 0.01;
  double overlap = 0.2;  // fraction of items labelled by a second annotator
};

/// `samples` rows are (community_id, tweet_id).
std::vector<LabelRecord> simulate_labels(const std::vector<std::pair<std::string, std::string>>& samples,
                                         std::span<const TweetEvent> events, const CorpusTruth& truth, int round,
                                         std::uint64_t seed, const AnnotatorModel& model = {});

/// Large single-country retweet log for scaling tests: `users` accounts in
/// `communities` equal groups, `retweets` events, intra-community with
/// probability p_intra, uniform targets.
struct RetweetLogSpec {
  std::size_t users = 100000;
  std::size_t retweets = 1000000;
  std::size_t communities = 10;
  double p_intra = 0.9;
  std::uint64_t seed = 1;
};

struct RetweetLog {
  std::vector<TweetEvent> events;
  UserCountries user_geo;  // everyone in "US"
};

RetweetLog synth_retweet_log(const RetweetLogSpec& spec);

}  // namespace polarnet
