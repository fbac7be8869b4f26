#include "polarnet/annotate.hpp"

#include <algorithm>
#include <iterator>
#include <random>
#include <set>

namespace polarnet {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::pro_vax:
      return "pro-vax";
    case Label::no_vax:
      return "no-vax";
    case Label::other:
      return "other";
  }
  return "other";
}

Label parse_label(std::string_view text) {
  const auto t = to_lower_ascii(trim(text));
  if (t == "pro-vax") return Label::pro_vax;
  if (t == "no-vax") return Label::no_vax;
  if (t == "other") return Label::other;
  throw FormatError("unknown label '" + std::string(text) + "'");
}

std::string_view to_string(Stance stance) { return stance == Stance::A ? "A" : "O"; }

Stance parse_stance(std::string_view text) {
  const auto t = trim(text);
  if (t == "A") return Stance::A;
  if (t == "O") return Stance::O;
  throw FormatError("unknown stance '" + std::string(text) + "'");
}

namespace {

// community -> tweet ids authored by its members (sorted, unique)
std::map<std::uint32_t, std::vector<std::string>> tweets_by_community(const Partition& partition,
                                                                     std::span<const TweetEvent> events,
                                                                     bool originals_only) {
  std::map<std::uint32_t, std::set<std::string>> sets;
  for (const auto& e : events) {
    if (originals_only && e.is_retweet()) continue;
    if (const auto c = partition.community_of(e.user_id)) sets[*c].insert(e.tweet_id);
  }
  std::map<std::uint32_t, std::vector<std::string>> out;
  for (auto& [c, s] : sets) out[c].assign(s.begin(), s.end());
  return out;
}

}  // namespace

std::vector<SampleItem> sample_round1(const Partition& partition, std::span<const TweetEvent> events, std::size_t n,
                                      double min_frac, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("sample_round1: n must be at least 1");
  const auto sizes = partition.community_sizes();
  const auto total = static_cast<double>(partition.size());
  const auto tweets = tweets_by_community(partition, events, false);
  std::vector<SampleItem> out;
  for (std::uint32_t c = 0; c < sizes.size(); ++c) {
    if (!(static_cast<double>(sizes[c]) > min_frac * total)) continue;
    const auto it = tweets.find(c);
    if (it == tweets.end()) continue;
    std::vector<std::string> chosen;
    std::mt19937_64 rng(mix_seed(seed, c));
    std::sample(it->second.begin(), it->second.end(), std::back_inserter(chosen), n, rng);
    for (auto& t : chosen) out.push_back({c, std::move(t)});
  }
  return out;
}

std::map<std::string, std::size_t> tweet_popularity(std::span<const TweetEvent> events) {
  std::map<std::string, std::size_t> pop;
  for (const auto& e : events)
    if (e.is_retweet()) ++pop[*e.retweeted_tweet_id];
  return pop;
}

std::vector<SampleItem> sample_round2(const Partition& partition, std::span<const TweetEvent> events,
                                      const std::map<std::uint32_t, LabelCounts>& round1_counts, std::size_t top,
                                      std::size_t exclude_top) {
  const auto popularity = tweet_popularity(events);
  const auto pop_of = [&](const std::string& id) {
    const auto it = popularity.find(id);
    return it == popularity.end() ? std::size_t{0} : it->second;
  };
  const auto by_popularity = [&](const std::string& a, const std::string& b) {
    const auto pa = pop_of(a);
    const auto pb = pop_of(b);
    return pa != pb ? pa > pb : a < b;
  };

  const auto tweets = tweets_by_community(partition, events, true);
  std::vector<std::string> network;
  for (const auto& [_, list] : tweets) network.insert(network.end(), list.begin(), list.end());
  std::sort(network.begin(), network.end(), by_popularity);
  const std::set<std::string> excluded(network.begin(),
                                       network.begin() + static_cast<std::ptrdiff_t>(std::min(exclude_top, network.size())));

  std::vector<SampleItem> out;
  for (const auto& [c, counts] : round1_counts) {
    if (!counts.novax_plurality()) continue;
    const auto it = tweets.find(c);
    if (it == tweets.end()) continue;
    std::vector<std::string> ranked;
    for (const auto& t : it->second)
      if (!excluded.contains(t)) ranked.push_back(t);
    std::sort(ranked.begin(), ranked.end(), by_popularity);
    if (ranked.size() > top) ranked.resize(top);
    for (auto& t : ranked) out.push_back({c, std::move(t)});
  }
  return out;
}

double cohen_kappa(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) throw InvalidArgument("cohen_kappa: label vectors differ in length");
  if (a.empty()) throw InvalidArgument("cohen_kappa: no labels");
  const auto n = static_cast<double>(a.size());
  std::map<std::string_view, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
    if (a[i] == b[i]) ++agree;
  }
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0.0;
  for (const auto& [_, m] : marginals) p_e += (static_cast<double>(m.first) / n) * (static_cast<double>(m.second) / n);
  if (p_e >= 1.0) throw InvalidArgument("cohen_kappa: degenerate marginals (p_e = 1)");
  return (p_o - p_e) / (1.0 - p_e);
}

double cohen_kappa(std::span<const Label> a, std::span<const Label> b, KappaMode mode) {
  if (a.size() != b.size()) throw InvalidArgument("cohen_kappa: label vectors differ in length");
  std::vector<std::string> sa;
  std::vector<std::string> sb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (mode == KappaMode::pro_vs_novax && (a[i] == Label::other || b[i] == Label::other)) continue;
    sa.emplace_back(to_string(a[i]));
    sb.emplace_back(to_string(b[i]));
  }
  return cohen_kappa(std::span<const std::string>(sa), std::span<const std::string>(sb));
}

std::map<std::string, LabelCounts> count_labels(std::span<const LabelRecord> records, int round) {
  std::map<std::string, LabelCounts> counts;
  for (const auto& r : records) {
    if (round != 0 && r.round != round) continue;
    auto& c = counts[r.community_id];
    switch (r.label) {
      case Label::pro_vax:
        ++c.pro_vax;
        break;
      case Label::no_vax:
        ++c.no_vax;
        break;
      case Label::other:
        ++c.other;
        break;
    }
  }
  return counts;
}

StanceMap classify_communities(std::span<const LabelRecord> records, std::size_t threshold) {
  StanceMap map;
  for (const auto& [community, counts] : count_labels(records, 0)) {
    map.novax_labels[community] = counts.no_vax;
    map.stance[community] = counts.no_vax > threshold ? Stance::A : Stance::O;
  }
  return map;
}

std::vector<LabelRecord> load_labels(const std::filesystem::path& path) {
  std::vector<LabelRecord> records;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 5)
      throw FormatError("label line must be tweet_id<TAB>community_id<TAB>round<TAB>annotator_id<TAB>label: " + line);
    LabelRecord r;
    r.tweet_id = std::string(trim(parts[0]));
    r.community_id = std::string(trim(parts[1]));
    const auto round = trim(parts[2]);
    if (round == "1") r.round = 1;
    else if (round == "2") r.round = 2;
    else throw FormatError("label round must be 1 or 2: " + line);
    r.annotator_id = std::string(trim(parts[3]));
    r.label = parse_label(parts[4]);
    records.push_back(std::move(r));
  }
  return records;
}

void save_labels(const std::filesystem::path& path, std::span<const LabelRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += r.tweet_id + '\t' + r.community_id + '\t' + std::to_string(r.round) + '\t' + r.annotator_id + '\t' +
           std::string(to_string(r.label)) + '\n';
  }
  write_file(path, out);
}

void save_stance_map(const std::filesystem::path& path, const StanceMap& map, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  for (const auto& [community, stance] : map.stance) {
    const auto it = map.novax_labels.find(community);
    out += community + '\t' + std::string(to_string(stance)) + '\t' +
           std::to_string(it == map.novax_labels.end() ? 0 : it->second) + '\n';
  }
  write_file(path, out);
}

StanceMap load_stance_map(const std::filesystem::path& path) {
  StanceMap map;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 3) throw FormatError("stance line must be community_id<TAB>stance<TAB>novax_labels: " + line);
    const auto community = std::string(trim(parts[0]));
    map.stance[community] = parse_stance(parts[1]);
    try {
      map.novax_labels[community] = std::stoul(std::string(parts[2]));
    } catch (const std::exception&) {
      throw FormatError("bad label count: " + line);
    }
  }
  return map;
}

std::string tsv_safe(std::string_view text) {
  std::string out(text);
  for (char& c : out)
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  return out;
}

}  // namespace polarnet
