#include "polarnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "polarnet/common.hpp"
#include "polarnet/geolocate.hpp"

namespace polarnet {

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw InvalidArgument(std::string(name) + " must be a finite rate >= 0");
}

std::string padded(char prefix, std::uint64_t n, int width) {
  auto digits = std::to_string(n);
  if (static_cast<int>(digits.size()) < width) digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return prefix + digits;
}

// Visits the pairs of a Bernoulli(p) random graph by geometric skipping.
// Same-block pairs (w < v) when `square` is false, otherwise all n_a x n_b pairs.
template <typename Rng, typename Visit>
void sample_pairs(Rng& rng, std::size_t n_a, std::size_t n_b, bool square, double p, Visit&& visit) {
  if (p <= 0.0) return;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto total = square ? static_cast<std::uint64_t>(n_a) * n_b : static_cast<std::uint64_t>(n_a) * (n_a - 1) / 2;
  const double log_q = p < 1.0 ? std::log1p(-p) : 0.0;
  std::uint64_t idx = 0;
  bool first = true;
  // Upper-triangle pairs are enumerated row by row: (1,0), (2,0), (2,1), ...
  std::uint64_t row = 1, row_start = 0;
  while (true) {
    std::uint64_t skip = 0;
    if (p < 1.0) {
      const double r = unit(rng);
      skip = static_cast<std::uint64_t>(std::floor(std::log1p(-r) / log_q));
    }
    idx = first ? skip : idx + 1 + skip;
    first = false;
    if (idx >= total) return;
    if (square) {
      visit(static_cast<std::size_t>(idx / n_b), static_cast<std::size_t>(idx % n_b));
    } else {
      while (idx >= row_start + row) {
        row_start += row;
        ++row;
      }
      visit(static_cast<std::size_t>(row), static_cast<std::size_t>(idx - row_start));
    }
  }
}

}  // namespace

void SbmSpec::validate() const {
  if (block_sizes.empty()) throw InvalidArgument("SBM needs at least one block");
  for (const auto s : block_sizes)
    if (s == 0) throw InvalidArgument("SBM block sizes must be positive");
  check_probability(p_in, "p_in");
  check_probability(p_out, "p_out");
  if (p_out > p_in) throw InvalidArgument("p_out must not exceed p_in");
  if (!(weight_mean >= 1.0) || !std::isfinite(weight_mean)) throw InvalidArgument("weight_mean must be >= 1");
}

WeightedGraph sbm_generate(const SbmSpec& spec) {
  spec.validate();
  std::vector<std::size_t> offset(spec.block_sizes.size() + 1, 0);
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) offset[b + 1] = offset[b] + spec.block_sizes[b];
  std::vector<std::string> names(offset.back());
  for (std::size_t i = 0; i < names.size(); ++i) names[i] = padded('v', i, 6);

  GraphBuilder builder(false);
  for (const auto& n : names) builder.add_node(n);
  std::uint64_t stream = 0;
  for (std::size_t a = 0; a < spec.block_sizes.size(); ++a) {
    for (std::size_t b = a; b < spec.block_sizes.size(); ++b) {
      std::mt19937_64 rng(mix_seed(spec.seed, stream++));
      std::geometric_distribution<std::int64_t> extra(1.0 / spec.weight_mean);
      const auto add = [&](std::size_t u, std::size_t v) {
        builder.add_edge(names[u], names[v], 1 + extra(rng));
      };
      if (a == b) {
        sample_pairs(rng, spec.block_sizes[a], 0, false, spec.p_in,
                     [&](std::size_t v, std::size_t w) { add(offset[a] + v, offset[a] + w); });
      } else {
        sample_pairs(rng, spec.block_sizes[a], spec.block_sizes[b], true, spec.p_out,
                     [&](std::size_t v, std::size_t w) { add(offset[a] + v, offset[b] + w); });
      }
    }
  }
  return std::move(builder).build();
}

Partition sbm_truth(const SbmSpec& spec) {
  spec.validate();
  std::vector<std::string> names;
  std::vector<std::uint64_t> labels;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    for (std::size_t i = 0; i < spec.block_sizes[b]; ++i) {
      names.push_back(padded('v', names.size(), 6));
      labels.push_back(b);
    }
  }
  return Partition::from_labels(std::move(names), labels);
}

// ---------------------------------------------------------------------------
// Toy world used by the corpus generator.

namespace {

struct ToyCountry {
  const char* code;
  const char* name;
  std::vector<const char*> places;  // display form; the gazetteer stores them normalized
};

const std::vector<ToyCountry>& toy_countries() {
  static const std::vector<ToyCountry> table = {
      {"US", "United States", {"New York", "Texas", "California", "Chicago", "USA"}},
      {"GB", "United Kingdom", {"London", "Manchester", "Scotland", "UK"}},
      {"FR", "France", {"Paris", "Lyon", "Marseille", "Toulouse"}},
      {"IT", "Italia", {"Roma", "Milano", "Napoli", "Italy"}},
      {"ES", "España", {"Madrid", "Barcelona", "Sevilla", "Spain"}},
      {"DE", "Deutschland", {"Berlin", "München", "Hamburg", "Germany"}},
      {"BR", "Brasil", {"São Paulo", "Rio de Janeiro", "Brazil"}},
      {"NL", "Nederland", {"Amsterdam", "Rotterdam", "Utrecht"}},
  };
  return table;
}

const ToyCountry& toy_country(const CountryCode& code) {
  for (const auto& c : toy_countries())
    if (code == c.code) return c;
  throw InvalidArgument("country " + code + " is not in the toy gazetteer");
}

const std::map<std::string, std::vector<std::string>>& toy_keywords() {
  static const std::map<std::string, std::vector<std::string>> kw = {
      {"en", {"vaccine", "vaccines", "vaccination", "covid vaccine"}},
      {"fr", {"vaccin", "vaccins", "vaccination"}},
      {"it", {"vaccino", "vaccini", "vaccinazione"}},
      {"es", {"vacuna", "vacunas", "vacunación"}},
      {"de", {"impfung", "impfstoff"}},
      {"pt", {"vacina", "vacinas"}},
      {"nl", {"vaccin", "vaccinatie"}},
  };
  return kw;
}

const std::vector<std::string>& keywords_for(const std::string& lang) {
  const auto it = toy_keywords().find(lang);
  if (it == toy_keywords().end()) throw InvalidArgument("no toy keywords for language " + lang);
  return it->second;
}

const std::vector<const char*> kStopPhrases = {"Worldwide", "Planet Earth", "everywhere 🌍", "Global citizen"};
const std::vector<const char*> kStoplist = {"worldwide", "planet earth", "everywhere", "global citizen", "earth",
                                           "internet"};
const std::vector<const char*> kLowcredDomains = {"vaxtruth.example.net",   "freedomwire.example.info",
                                                  "healthsecrets.example.com", "realnews-now.example.org",
                                                  "patriotpulse.example.net", "naturalcure.example.info"};
const std::vector<const char*> kMainstreamDomains = {"dailynews.example.com", "healthdesk.example.org",
                                                     "worldreport.example.net", "sciencetoday.example.com"};
const std::vector<const char*> kFiller = {"update", "news", "today", "thread", "read this", "data"};
const std::vector<const char*> kOfftopic = {"weather today", "match tonight", "new recipe", "traffic jam"};

Stance parse_stance_tag(std::string_view s) { return parse_stance(s); }

}  // namespace

void CorpusSpec::validate() const {
  if (countries.empty()) throw InvalidArgument("corpus spec needs at least one country");
  if (periods.empty()) throw InvalidArgument("corpus spec needs at least one period");
  std::set<CountryCode> seen;
  for (const auto& c : countries) {
    toy_country(c.code);
    keywords_for(c.lang);
    if (!seen.insert(c.code).second) throw InvalidArgument("duplicate country " + c.code);
    if (c.users < 2) throw InvalidArgument("country " + c.code + " needs at least 2 users");
    if (c.communities.empty()) throw InvalidArgument("country " + c.code + " needs a community mix");
    double total = 0.0;
    for (const auto& k : c.communities) {
      if (!(k.share > 0.0)) throw InvalidArgument("community shares must be positive");
      total += k.share;
    }
    if (std::abs(total - 1.0) > 1e-6) throw InvalidArgument("community shares of " + c.code + " must sum to 1");
  }
  for (const auto& p : periods)
    if (!(p.start < p.end)) throw InvalidArgument("period " + p.name + " is empty");
  check_rate(originals_per_user, "originals_per_user");
  check_rate(retweets_per_user, "retweets_per_user");
  check_rate(aa_multiplier, "aa_multiplier");
  check_rate(popularity_alpha, "popularity_alpha");
  for (const auto& [p, name] :
       {std::pair{p_intra, "p_intra"}, {cross_border, "cross_border"}, {url_rate_a, "url_rate_a"},
        {url_rate_o, "url_rate_o"}, {lowcred_rate_a, "lowcred_rate_a"}, {lowcred_rate_o, "lowcred_rate_o"},
        {youtube_rate, "youtube_rate"}, {shortener_rate, "shortener_rate"}, {offtopic_rate, "offtopic_rate"},
        {unlocated_fraction, "unlocated_fraction"}, {mover_fraction, "mover_fraction"},
        {suspend_rate_a, "suspend_rate_a"}, {suspend_rate_o, "suspend_rate_o"}})
    check_probability(p, name);
  if (popularity_alpha <= 0.0) throw InvalidArgument("popularity_alpha must be positive");
  if (url_pool == 0) throw InvalidArgument("url_pool must be positive");
}

CorpusSpec CorpusSpec::from_doc(const KeyValueDoc& doc) {
  doc.require_known({"seed", "country", "period", "originals_per_user", "retweets_per_user", "p_intra",
                     "cross_border", "aa_multiplier", "url_rate_a", "url_rate_o", "lowcred_rate_a",
                     "lowcred_rate_o", "youtube_rate", "shortener_rate", "offtopic_rate", "unlocated_fraction",
                     "mover_fraction", "suspend_rate_a", "suspend_rate_o", "popularity_alpha", "url_pool",
                     "min_users"});
  CorpusSpec s;
  s.seed = static_cast<std::uint64_t>(doc.get_int("seed", 1));
  // country = CODE LANG USERS STANCE:SHARE [STANCE:SHARE ...]
  for (const auto& line : doc.get_all("country")) {
    std::istringstream in(line);
    CountrySpec c;
    long long users = 0;
    if (!(in >> c.code >> c.lang >> users) || users < 0)
      throw FormatError("country entry must be 'CODE LANG USERS STANCE:SHARE ...': " + line);
    c.users = static_cast<std::size_t>(users);
    std::string mix;
    while (in >> mix) {
      const auto colon = mix.find(':');
      if (colon == std::string::npos) throw FormatError("community mix entry must be STANCE:SHARE: " + mix);
      CommunitySpec k;
      k.stance = parse_stance_tag(std::string_view(mix).substr(0, colon));
      try {
        k.share = std::stod(mix.substr(colon + 1));
      } catch (const std::exception&) {
        throw FormatError("bad community share: " + mix);
      }
      c.communities.push_back(k);
    }
    s.countries.push_back(std::move(c));
  }
  // period = NAME START END
  for (const auto& line : doc.get_all("period")) {
    std::istringstream in(line);
    std::string name, start, end;
    if (!(in >> name >> start >> end)) throw FormatError("period entry must be 'NAME START END': " + line);
    s.periods.push_back(make_period(name, start, end));
  }
  s.originals_per_user = doc.get_double("originals_per_user", s.originals_per_user);
  s.retweets_per_user = doc.get_double("retweets_per_user", s.retweets_per_user);
  s.p_intra = doc.get_double("p_intra", s.p_intra);
  s.cross_border = doc.get_double("cross_border", s.cross_border);
  s.aa_multiplier = doc.get_double("aa_multiplier", s.aa_multiplier);
  s.url_rate_a = doc.get_double("url_rate_a", s.url_rate_a);
  s.url_rate_o = doc.get_double("url_rate_o", s.url_rate_o);
  s.lowcred_rate_a = doc.get_double("lowcred_rate_a", s.lowcred_rate_a);
  s.lowcred_rate_o = doc.get_double("lowcred_rate_o", s.lowcred_rate_o);
  s.youtube_rate = doc.get_double("youtube_rate", s.youtube_rate);
  s.shortener_rate = doc.get_double("shortener_rate", s.shortener_rate);
  s.offtopic_rate = doc.get_double("offtopic_rate", s.offtopic_rate);
  s.unlocated_fraction = doc.get_double("unlocated_fraction", s.unlocated_fraction);
  s.mover_fraction = doc.get_double("mover_fraction", s.mover_fraction);
  s.suspend_rate_a = doc.get_double("suspend_rate_a", s.suspend_rate_a);
  s.suspend_rate_o = doc.get_double("suspend_rate_o", s.suspend_rate_o);
  s.popularity_alpha = doc.get_double("popularity_alpha", s.popularity_alpha);
  const auto pool = doc.get_int("url_pool", static_cast<std::int64_t>(s.url_pool));
  const auto min_users = doc.get_int("min_users", static_cast<std::int64_t>(s.min_users));
  if (pool < 0 || min_users < 0) throw FormatError("url_pool and min_users must be non-negative");
  s.url_pool = static_cast<std::size_t>(pool);
  s.min_users = static_cast<std::size_t>(min_users);
  s.validate();
  return s;
}

CorpusSpec CorpusSpec::load(const std::filesystem::path& path) { return from_doc(KeyValueDoc::load(path)); }

namespace {

struct SynthUser {
  std::string id;
  std::size_t country = 0;
  std::size_t community = 0;  // index within the country
  Stance stance = Stance::O;
  double popularity = 1.0;
  std::vector<std::optional<std::string>> location;  // per period
};

enum ShareClass : std::size_t { kNoUrl = 0, kCredible = 1, kLowcred = 2 };

// Members of a target group and, per period, their posts by share class,
// drawn with the author's popularity split over the author's posts.
struct Group {
  std::vector<std::size_t> members;
  std::array<std::vector<std::size_t>, 3> posts;
  std::array<std::discrete_distribution<std::size_t>, 3> pick;
};

struct Original {
  std::size_t event = 0;
  bool has_url = false;
  bool lowcred = false;
};

std::string community_label(const CountryCode& code, std::size_t k) { return code + ":" + std::to_string(k); }

std::string lowcred_url(const CountryCode& code, std::size_t k, std::size_t j) {
  return "https://www." + std::string(kLowcredDomains[j % kLowcredDomains.size()]) + "/" + to_lower_ascii(code) +
         "-" + std::to_string(k) + "/" + std::to_string(j);
}

std::string mainstream_url(const CountryCode& code, std::size_t k, std::size_t j) {
  return "https://" + std::string(kMainstreamDomains[j % kMainstreamDomains.size()]) + "/" + to_lower_ascii(code) +
         "/" + std::to_string(k) + "/" + std::to_string(j);
}

std::string youtube_url(const CountryCode& code, std::size_t k, std::size_t j) {
  return "https://youtu.be/" + to_lower_ascii(code) + std::to_string(k) + "x" + std::to_string(j);
}

std::string short_url(const std::string& target) { return "https://bit.ly/" + hex64(fnv1a64(target)).substr(0, 10); }

}  // namespace

Corpus synth_corpus(const CorpusSpec& spec) {
  spec.validate();
  Corpus corpus;
  auto& truth = corpus.truth;
  const std::size_t n_periods = spec.periods.size();

  // Users, communities, popularity and profile locations.
  std::vector<SynthUser> users;
  std::vector<std::vector<Group>> community_groups(spec.countries.size());
  std::vector<std::map<Stance, Group>> stance_groups(spec.countries.size());
  std::vector<Group> country_groups(spec.countries.size());
  {
    std::mt19937_64 rng(mix_seed(spec.seed, 1));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t c = 0; c < spec.countries.size(); ++c) {
      const auto& cs = spec.countries[c];
      const auto& toy = toy_country(cs.code);
      std::vector<std::size_t> order(cs.users);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<std::size_t> community_of(cs.users, 0);
      double cum = 0.0;
      std::size_t pos = 0;
      for (std::size_t k = 0; k < cs.communities.size(); ++k) {
        cum += cs.communities[k].share;
        const auto end = k + 1 == cs.communities.size()
                             ? cs.users
                             : std::min(cs.users, static_cast<std::size_t>(std::llround(cum * static_cast<double>(cs.users))));
        for (; pos < end; ++pos) community_of[order[pos]] = k;
      }
      community_groups[c].resize(cs.communities.size());
      for (std::size_t i = 0; i < cs.users; ++i) {
        SynthUser u;
        u.id = "u" + to_lower_ascii(cs.code) + padded('_', i, 5).substr(1);
        u.country = c;
        u.community = community_of[i];
        u.stance = cs.communities[u.community].stance;
        u.popularity = std::pow(1.0 - unit(rng), -1.0 / spec.popularity_alpha);
        const bool unlocated = unit(rng) < spec.unlocated_fraction;
        const bool mover = !unlocated && n_periods > 1 && spec.countries.size() > 1 && unit(rng) < spec.mover_fraction;
        std::string home;
        if (unlocated) {
          home = kStopPhrases[static_cast<std::size_t>(unit(rng) * kStopPhrases.size()) % kStopPhrases.size()];
        } else {
          const std::string place = toy.places[static_cast<std::size_t>(unit(rng) * toy.places.size()) % toy.places.size()];
          switch (static_cast<int>(unit(rng) * 4.0)) {
            case 0:
              home = place;
              break;
            case 1:
              home = place + ", " + toy.name;
              break;
            case 2:
              home = "📍 " + place;
              break;
            default:
              home = to_lower_ascii(place) + " ✨";
              break;
          }
        }
        u.location.assign(n_periods, home);
        if (mover) {
          const auto other = (c + 1 + static_cast<std::size_t>(unit(rng) * (spec.countries.size() - 1)) %
                                          (spec.countries.size() - 1)) %
                             spec.countries.size();
          const auto& away = toy_country(spec.countries[other].code);
          for (std::size_t p = n_periods / 2; p < n_periods; ++p) u.location[p] = std::string(away.places.front());
        }
        if (!unlocated && !mover) truth.user_geo[u.id] = cs.code;
        truth.community[u.id] = community_label(cs.code, u.community);
        const auto idx = users.size();
        community_groups[c][u.community].members.push_back(idx);
        stance_groups[c][u.stance].members.push_back(idx);
        country_groups[c].members.push_back(idx);
        users.push_back(std::move(u));
      }
      for (std::size_t k = 0; k < cs.communities.size(); ++k)
        truth.community_stance[community_label(cs.code, k)] = cs.communities[k].stance;
    }
    std::mt19937_64 status_rng(mix_seed(spec.seed, 2));
    for (const auto& u : users) {
      const double rate = u.stance == Stance::A ? spec.suspend_rate_a : spec.suspend_rate_o;
      truth.status[u.id] = unit(status_rng) < rate ? "suspended" : "active";
    }
  }

  std::vector<double> zipf(spec.url_pool);
  for (std::size_t r = 0; r < zipf.size(); ++r) zipf[r] = 1.0 / static_cast<double>(r + 1);

  std::uint64_t next_id = 0;
  const auto new_id = [&] { return padded('t', next_id++, 10); };

  for (std::size_t p = 0; p < n_periods; ++p) {
    const auto& period = spec.periods[p];
    std::mt19937_64 rng(mix_seed(spec.seed, 100 + p));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::discrete_distribution<std::size_t> pool_pick(zipf.begin(), zipf.end());
    const auto span_s = (period.end - period.start).count();
    const auto time_after = [&](Timestamp from) {
      const auto left = (period.end - from).count();
      std::uniform_int_distribution<long long> d(0, std::max<long long>(0, left - 1));
      return from + std::chrono::seconds(d(rng));
    };

    std::vector<TweetEvent> events;
    std::vector<std::vector<Original>> originals(users.size());

    for (std::size_t ui = 0; ui < users.size(); ++ui) {
      const auto& u = users[ui];
      const auto& cs = spec.countries[u.country];
      const auto& kws = keywords_for(cs.lang);
      std::size_t n = 1;
      if (spec.originals_per_user > 1.0) n += std::poisson_distribution<std::size_t>(spec.originals_per_user - 1.0)(rng);
      for (std::size_t t = 0; t < n; ++t) {
        TweetEvent e;
        e.tweet_id = new_id();
        e.user_id = u.id;
        e.timestamp = period.start + std::chrono::seconds(std::uniform_int_distribution<long long>(0, span_s - 1)(rng));
        e.lang = cs.lang;
        if (unit(rng) < spec.offtopic_rate) {
          e.text = std::string(kOfftopic[t % kOfftopic.size()]) + " " + std::to_string(t);
        } else {
          e.text = kws[static_cast<std::size_t>(unit(rng) * kws.size()) % kws.size()] + " " +
                   kFiller[static_cast<std::size_t>(unit(rng) * kFiller.size()) % kFiller.size()] + " " +
                   std::to_string(t);
        }
        Original o;
        o.event = events.size();
        const double url_rate = u.stance == Stance::A ? spec.url_rate_a : spec.url_rate_o;
        if (unit(rng) < url_rate) {
          o.has_url = true;
          o.lowcred = unit(rng) < (u.stance == Stance::A ? spec.lowcred_rate_a : spec.lowcred_rate_o);
          const auto j = pool_pick(rng);
          std::string url;
          if (o.lowcred) {
            url = lowcred_url(cs.code, u.community, j);
          } else if (unit(rng) < spec.youtube_rate) {
            url = youtube_url(cs.code, u.community, j);
          } else {
            url = mainstream_url(cs.code, u.community, j);
          }
          if (unit(rng) < spec.shortener_rate) url = short_url(url);
          e.urls.push_back(std::move(url));
        }
        e.profile_location = u.location[p];
        originals[ui].push_back(o);
        events.push_back(std::move(e));
      }
    }

    const auto index_posts = [&](Group& g) {
      std::array<std::vector<double>, 3> w;
      for (auto& v : g.posts) v.clear();
      for (const auto m : g.members) {
        for (const auto& o : originals[m]) {
          const auto cls = !o.has_url ? kNoUrl : o.lowcred ? kLowcred : kCredible;
          g.posts[cls].push_back(o.event);
          w[cls].push_back(users[m].popularity / static_cast<double>(originals[m].size()));
        }
      }
      for (std::size_t c = 0; c < 3; ++c)
        if (!w[c].empty()) g.pick[c] = std::discrete_distribution<std::size_t>(w[c].begin(), w[c].end());
    };
    for (std::size_t c = 0; c < spec.countries.size(); ++c) {
      for (auto& g : community_groups[c]) index_posts(g);
      for (auto& [_, g] : stance_groups[c]) index_posts(g);
      index_posts(country_groups[c]);
    }

    for (std::size_t ui = 0; ui < users.size(); ++ui) {
      const auto& u = users[ui];
      const std::size_t n = std::poisson_distribution<std::size_t>(spec.retweets_per_user)(rng);
      for (std::size_t t = 0; t < n; ++t) {
        Group* group = nullptr;
        const double abroad = u.stance == Stance::A ? std::min(1.0, spec.cross_border * spec.aa_multiplier)
                                                    : spec.cross_border;
        if (spec.countries.size() > 1 && unit(rng) < abroad) {
          auto other = static_cast<std::size_t>(unit(rng) * (spec.countries.size() - 1)) % (spec.countries.size() - 1);
          if (other >= u.country) ++other;
          const auto it = stance_groups[other].find(u.stance);
          group = it != stance_groups[other].end() ? &it->second : &country_groups[other];
        } else {
          auto k = u.community;
          const auto n_comm = community_groups[u.country].size();
          if (n_comm > 1 && unit(rng) >= spec.p_intra) {
            k = static_cast<std::size_t>(unit(rng) * (n_comm - 1)) % (n_comm - 1);
            if (k >= u.community) ++k;
          }
          group = &community_groups[u.country][k];
        }

        // The share class follows the retweeter's stance rates, so every
        // cohort's URL and low-credibility shares match the planted values.
        const bool a = u.stance == Stance::A;
        auto cls = kNoUrl;
        if (unit(rng) < (a ? spec.url_rate_a : spec.url_rate_o))
          cls = unit(rng) < (a ? spec.lowcred_rate_a : spec.lowcred_rate_o) ? kLowcred : kCredible;
        if (group->posts[cls].empty()) {
          for (const auto alt : {kCredible, kNoUrl, kLowcred})
            if (!group->posts[alt].empty()) {
              cls = alt;
              break;
            }
        }
        if (group->posts[cls].empty()) continue;
        std::size_t chosen = group->posts[cls][group->pick[cls](rng)];
        for (int attempt = 0; attempt < 8 && events[chosen].user_id == u.id; ++attempt)
          chosen = group->posts[cls][group->pick[cls](rng)];
        if (events[chosen].user_id == u.id) continue;

        const auto& src = events[chosen];
        TweetEvent e;
        e.tweet_id = new_id();
        e.user_id = u.id;
        e.timestamp = time_after(src.timestamp);
        e.lang = src.lang;
        e.text = "RT @" + src.user_id + ": " + src.text;
        e.retweeted_user_id = src.user_id;
        e.retweeted_tweet_id = src.tweet_id;
        e.urls = src.urls;
        e.profile_location = u.location[p];
        events.push_back(std::move(e));
      }
    }
    std::move(events.begin(), events.end(), std::back_inserter(corpus.events));
  }

  std::sort(corpus.events.begin(), corpus.events.end(), [](const TweetEvent& a, const TweetEvent& b) {
    return std::tie(a.timestamp, a.tweet_id) < std::tie(b.timestamp, b.tweet_id);
  });
  return corpus;
}

void write_corpus(const std::filesystem::path& dir, const CorpusSpec& spec, const Corpus& corpus) {
  write_events_file(dir / "events.jsonl", corpus.events);

  std::ostringstream gaz, stop, kw, periods, langs, domains, shorteners, status;
  gaz << "# name\tcountry\n";
  for (const auto& c : spec.countries) {
    const auto& toy = toy_country(c.code);
    gaz << normalize_location(toy.name) << '\t' << c.code << '\n';
    for (const auto* place : toy.places) gaz << normalize_location(place) << '\t' << c.code << '\n';
  }
  for (const auto* s : kStoplist) stop << s << '\n';
  std::set<std::string> seen_langs;
  for (const auto& c : spec.countries) {
    if (!seen_langs.insert(c.lang).second) continue;
    for (const auto& k : keywords_for(c.lang)) kw << c.lang << '\t' << k << '\n';
  }
  for (const auto& p : spec.periods)
    periods << p.name << '\t' << format_timestamp(p.start) << '\t' << format_timestamp(p.end) << '\n';
  for (const auto& c : spec.countries) langs << c.code << '\t' << c.lang << '\n';
  for (const auto* d : kLowcredDomains) domains << d << "\tsynth\n";

  std::set<std::string> shortened;
  for (const auto& e : corpus.events)
    for (const auto& u : e.urls)
      if (u.starts_with("https://bit.ly/")) shortened.insert(u);
  if (!shortened.empty()) {
    // Recover the targets by regenerating candidate URLs; the pool is small.
    std::unordered_map<std::string, std::string> inverse;
    for (const auto& c : spec.countries) {
      for (std::size_t k = 0; k < c.communities.size(); ++k) {
        for (std::size_t j = 0; j < spec.url_pool; ++j) {
          for (const auto& full : {lowcred_url(c.code, k, j), mainstream_url(c.code, k, j), youtube_url(c.code, k, j)})
            inverse.emplace(short_url(full), full);
        }
      }
    }
    for (const auto& s : shortened) {
      const auto it = inverse.find(s);
      if (it != inverse.end()) shorteners << s << '\t' << it->second << '\n';
    }
  }
  for (const auto& [user, st] : corpus.truth.status) status << user << '\t' << st << '\n';

  write_file(dir / "gazetteer.tsv", gaz.str());
  write_file(dir / "stoplist.tsv", stop.str());
  write_file(dir / "keywords.tsv", kw.str());
  write_file(dir / "periods.tsv", periods.str());
  write_file(dir / "spoken_langs.tsv", langs.str());
  write_file(dir / "domains.tsv", domains.str());
  write_file(dir / "shorteners.tsv", shorteners.str());
  write_file(dir / "status.tsv", status.str());

  std::ostringstream geo, comm, stance;
  std::map<std::string, CountryCode> geo_sorted(corpus.truth.user_geo.begin(), corpus.truth.user_geo.end());
  for (const auto& [u, c] : geo_sorted) geo << u << '\t' << c << '\n';
  for (const auto& [u, k] : corpus.truth.community) comm << u << '\t' << k << '\n';
  for (const auto& [k, s] : corpus.truth.community_stance) stance << k << '\t' << to_string(s) << '\n';
  write_file(dir / "truth" / "user_geo.tsv", geo.str());
  write_file(dir / "truth" / "communities.tsv", comm.str());
  write_file(dir / "truth" / "stances.tsv", stance.str());

  std::ostringstream conf;
  std::string lang_list;
  for (const auto& l : seen_langs) lang_list += (lang_list.empty() ? "" : ",") + l;
  conf << "# generated with the corpus\n"
       << "events = events.jsonl\n"
       << "gazetteer = gazetteer.tsv\n"
       << "stoplist = stoplist.tsv\n"
       << "keywords = keywords.tsv\n"
       << "periods = periods.tsv\n"
       << "spoken_langs = spoken_langs.tsv\n"
       << "domains = domains.tsv\n"
       << "shorteners = shorteners.tsv\n"
       << "status = status.tsv\n"
       << "labels = labels/round1.tsv, labels/round2.tsv\n"
       << "lowcred_languages = " << lang_list << '\n'
       << "out = out\n"
       << "seed = " << spec.seed << '\n'
       << "min_users = " << spec.min_users << '\n';
  write_file(dir / "pipeline.conf", conf.str());
}

CorpusTruth load_truth(const std::filesystem::path& dir) {
  CorpusTruth t;
  const auto pairs = [](const std::filesystem::path& path) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& line : read_data_lines(path)) {
      const auto parts = split(line, '\t');
      if (parts.size() != 2) throw FormatError("expected two columns in " + path.string() + ": " + line);
      out.emplace_back(std::string(parts[0]), std::string(parts[1]));
    }
    return out;
  };
  for (auto& [u, c] : pairs(dir / "truth" / "user_geo.tsv")) t.user_geo[u] = c;
  for (auto& [u, k] : pairs(dir / "truth" / "communities.tsv")) t.community[u] = k;
  for (auto& [k, s] : pairs(dir / "truth" / "stances.tsv")) t.community_stance[k] = parse_stance(s);
  if (std::filesystem::exists(dir / "status.tsv"))
    for (auto& [u, s] : pairs(dir / "status.tsv")) t.status[u] = s;
  return t;
}

std::vector<LabelRecord> simulate_labels(const std::vector<std::pair<std::string, std::string>>& samples,
                                         std::span<const TweetEvent> events, const CorpusTruth& truth, int round,
                                         std::uint64_t seed, const AnnotatorModel& model) {
  std::unordered_map<std::string, const std::string*> author;
  for (const auto& e : events) author.emplace(e.tweet_id, &e.user_id);
  const auto draw = [&](Stance s, std::mt19937_64& rng) {
    const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (s == Stance::A) return r < model.novax_given_a ? Label::no_vax : Label::other;
    if (r < model.novax_given_o) return Label::no_vax;
    return r < model.novax_given_o + model.provax_given_o ? Label::pro_vax : Label::other;
  };
  std::vector<LabelRecord> out;
  for (const auto& [community_id, tweet_id] : samples) {
    Stance stance = Stance::O;
    if (const auto a = author.find(tweet_id); a != author.end()) {
      if (const auto k = truth.community.find(*a->second); k != truth.community.end()) {
        if (const auto s = truth.community_stance.find(k->second); s != truth.community_stance.end()) stance = s->second;
      }
    }
    std::mt19937_64 rng(mix_seed(seed + static_cast<std::uint64_t>(round), fnv1a64(tweet_id)));
    out.push_back({tweet_id, community_id, round, "ann1", draw(stance, rng)});
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < model.overlap)
      out.push_back({tweet_id, community_id, round, "ann2", draw(stance, rng)});
  }
  return out;
}

RetweetLog synth_retweet_log(const RetweetLogSpec& spec) {
  if (spec.users < 2 || spec.communities == 0 || spec.communities > spec.users)
    throw InvalidArgument("retweet log needs at least 2 users and 1..users communities");
  check_probability(spec.p_intra, "p_intra");
  RetweetLog log;
  std::vector<std::string> ids(spec.users);
  for (std::size_t i = 0; i < spec.users; ++i) {
    ids[i] = padded('u', i, 6);
    log.user_geo.emplace(ids[i], "US");
  }
  const std::size_t block = spec.users / spec.communities;
  std::mt19937_64 rng(mix_seed(spec.seed, 7));
  std::uniform_int_distribution<std::size_t> any(0, spec.users - 1);
  std::uniform_int_distribution<std::size_t> within(0, block - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Timestamp t0 = parse_timestamp("2021-01-01T00:00:00Z");
  log.events.reserve(spec.retweets);
  while (log.events.size() < spec.retweets) {
    const auto u = any(rng);
    const auto k = std::min(u / block, spec.communities - 1);
    const auto v = unit(rng) < spec.p_intra ? k * block + within(rng) : any(rng);
    if (u == v) continue;
    TweetEvent e;
    e.tweet_id = padded('r', log.events.size(), 8);
    e.user_id = ids[u];
    e.timestamp = t0 + std::chrono::seconds(log.events.size());
    e.lang = "en";
    e.retweeted_user_id = ids[v];
    e.retweeted_tweet_id = "o" + ids[v];
    log.events.push_back(std::move(e));
  }
  return log;
}

}  // namespace polarnet
