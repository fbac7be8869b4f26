#include "polarnet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <sstream>
#include <unordered_set>

#include "polarnet/annotate.hpp"
#include "polarnet/cluster.hpp"
#include "polarnet/cohorts.hpp"
#include "polarnet/flows.hpp"
#include "polarnet/geolocate.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/lowcred.hpp"
#include "polarnet/polarization.hpp"
#include "polarnet/synth.hpp"

namespace polarnet {

namespace fs = std::filesystem;

namespace {

// Runs f(0..n-1) on up to `workers` threads; results keep index order.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, unsigned workers, F&& f) {
  std::vector<T> out(n);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i; (i = next++) < n;) out[i] = f(i);
  };
  const auto threads = std::min<std::size_t>(std::max(1u, workers), n);
  if (threads <= 1) {
    work();
    return out;
  }
  std::vector<std::future<void>> jobs;
  for (std::size_t t = 0; t < threads; ++t) jobs.push_back(std::async(std::launch::async, work));
  std::exception_ptr error;
  for (auto& j : jobs) {
    try {
      j.get();
    } catch (...) {
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<std::vector<std::string>> read_table(const fs::path& path, char sep = '\t') {
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : read_data_lines(path)) {
    std::vector<std::string> row;
    for (const auto f : split(line, sep)) row.emplace_back(f);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string opt_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

std::string community_id(const Unit& u, std::string_view kind, std::uint32_t c) {
  return u.tag() + "_" + std::string(kind) + "_" + std::to_string(c);
}

// Unit events: the period's events authored by members of a network.
std::vector<TweetEvent> authored_by(std::span<const TweetEvent> events, const Partition& partition) {
  const std::unordered_set<std::string> members(partition.nodes.begin(), partition.nodes.end());
  std::vector<TweetEvent> out;
  for (const auto& e : events)
    if (members.contains(e.user_id)) out.push_back(e);
  return out;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig config, const RunOptions& options) : config_(std::move(config)), options_(options) {
  if (options_.out) config_.out = *options_.out;
  if (options_.workers) config_.workers = std::max(1u, *options_.workers);
  if (options_.seed) config_.seed = *options_.seed;
  config_.validate();
  digest_ = hex64(fnv1a64(config_.digest + "|seed=" + std::to_string(config_.seed)));
}

const std::vector<std::string>& Pipeline::stages() {
  static const std::vector<std::string> s = {"ingest", "geolocate", "build-graphs", "cluster", "sample",
                                             "classify", "metrics", "flows", "cohorts", "report"};
  return s;
}

void Pipeline::run(std::string_view stage, int round) {
  if (stage == "ingest") ingest();
  else if (stage == "geolocate") geolocate();
  else if (stage == "build-graphs") build_graphs();
  else if (stage == "cluster") cluster();
  else if (stage == "sample") sample(round);
  else if (stage == "classify") classify();
  else if (stage == "metrics") metrics();
  else if (stage == "flows") flows();
  else if (stage == "cohorts") cohorts();
  else if (stage == "report") report();
  else throw InvalidArgument("unknown stage '" + std::string(stage) + "'");
}

void Pipeline::run_all_until_labels() {
  ingest();
  geolocate();
  build_graphs();
  cluster();
  sample(1);
}

fs::path Pipeline::require(const std::string& stage, const fs::path& relative) const {
  auto path = config_.out / relative;
  if (!fs::exists(path)) throw MissingPrerequisite(stage, path);
  return path;
}

std::string Pipeline::comment() const { return "polarnet config " + digest_; }

void Pipeline::note(std::string text) { notes_.push_back(std::move(text)); }

const std::vector<Period>& Pipeline::periods() {
  if (!periods_) {
    if (!fs::exists(config_.periods)) throw IoError("periods file not found: " + config_.periods.string());
    periods_ = load_periods(config_.periods);
    if (periods_->empty()) throw FormatError("no periods configured");
  }
  return *periods_;
}

const std::vector<TweetEvent>& Pipeline::period_events(const std::string& period) {
  auto it = events_.find(period);
  if (it == events_.end()) {
    const auto path = require("ingest", fs::path("ingest") / (period + ".jsonl"));
    it = events_.emplace(period, parse_events_file(path).events).first;
  }
  return it->second;
}

std::map<CountryCode, std::string> Pipeline::country_langs() {
  std::map<CountryCode, std::string> out;
  for (const auto& row : read_table(require("geolocate", "geolocate/countries.tsv"))) {
    if (row.size() != 2) throw FormatError("geolocate/countries.tsv: expected country<TAB>lang");
    out[row[0]] = row[1];
  }
  return out;
}

bool Pipeline::selected(const Unit& u) const {
  return (options_.countries.empty() || options_.countries.contains(u.country)) &&
         (options_.periods.empty() || options_.periods.contains(u.period));
}

// Units with an RT network, in summary order (countries sorted, periods as configured).
std::vector<Unit> Pipeline::units(const std::string& stage) {
  std::vector<Unit> out;
  for (const auto& row : read_table(require(stage, "graphs/summary.tsv"))) {
    if (row.size() < 3 || row[0] == "country" || row[2] != "rt") continue;
    Unit u{row[0], row[1]};
    if (selected(u)) out.push_back(std::move(u));
  }
  return out;
}

namespace {

UserCountries load_user_geo(const fs::path& path) {
  UserCountries geo;
  for (const auto& row : read_table(path)) {
    if (row.size() != 2) throw FormatError(path.string() + ": expected user<TAB>country");
    geo[row[0]] = row[1];
  }
  return geo;
}

DomainList load_domains(const std::vector<fs::path>& lists) {
  DomainList all;
  for (const auto& path : lists) {
    const auto one = DomainList::load(path);
    for (const auto& [d, source] : one.entries()) all.add(d, source);
  }
  return all;
}

std::optional<StanceMap> load_stances(const fs::path& out) {
  const auto path = out / "stance" / "stance.tsv";
  if (!fs::exists(path)) return std::nullopt;
  return load_stance_map(path);
}

CommunityStances unit_stances(const StanceMap& map, const Unit& u, const Partition& p) {
  CommunityStances s;
  for (std::uint32_t c = 0; c < p.community_count(); ++c) {
    const auto it = map.stance.find(community_id(u, "rt", c));
    s[c] = it != map.stance.end() ? it->second : Stance::O;
  }
  return s;
}

}  // namespace

void Pipeline::ingest() {
  if (!fs::exists(config_.events)) throw IoError("events file not found: " + config_.events.string());
  auto parsed = parse_events_file(config_.events);
  std::vector<TweetEvent> kept;
  if (config_.keywords) {
    kept = filter_keywords(parsed.events, load_keywords(*config_.keywords), config_.reference_lang);
  } else {
    kept = std::move(parsed.events);
    note("ingest: no keyword file, all events kept");
  }

  std::ostringstream summary, rejects;
  summary << "# " << comment() << "\nperiod\tevents\tretweets\n";
  events_.clear();
  for (const auto& p : periods()) {
    auto slice = slice_period(kept, p);
    const auto retweets = std::count_if(slice.begin(), slice.end(), [](const TweetEvent& e) { return e.is_retweet(); });
    summary << p.name << '\t' << slice.size() << '\t' << retweets << '\n';
    write_events_file(config_.out / "ingest" / (p.name + ".jsonl"), slice);
    events_[p.name] = std::move(slice);
  }
  rejects << "# " << comment() << "\n# lines " << parsed.lines << ", rejected " << parsed.rejects.size()
          << ", keyword matches " << kept.size() << "\nline\treason\n";
  for (const auto& r : parsed.rejects) rejects << r.line << '\t' << tsv_safe(r.reason) << '\n';
  write_file(config_.out / "ingest" / "rejects.tsv", rejects.str());
  write_file(config_.out / "ingest" / "summary.tsv", summary.str());
}

void Pipeline::geolocate() {
  require("ingest", "ingest/summary.tsv");
  const auto gazetteer = Gazetteer::load(config_.gazetteer, config_.stoplist);
  const auto exclusions = config_.exclusions ? load_exclusions(*config_.exclusions) : std::set<std::string>{};
  std::vector<PeriodEvents> by_period;
  for (const auto& p : periods()) by_period.push_back({p.name, period_events(p.name)});
  const auto geo = assign_countries(by_period, gazetteer, exclusions);
  const auto eligible = eligible_countries(geo, by_period, config_.min_users);

  std::map<CountryCode, std::set<std::string>> spoken;
  if (config_.spoken_langs) {
    for (const auto& row : read_table(*config_.spoken_langs)) {
      if (row.size() != 2) throw FormatError("spoken_langs: expected country<TAB>lang[,lang...]");
      for (const auto& l : split_list(row[1])) spoken[row[0]].insert(l);
    }
  }
  std::vector<TweetEvent> all;
  for (const auto& pe : by_period) all.insert(all.end(), pe.events.begin(), pe.events.end());

  std::ostringstream countries;
  countries << "# " << comment() << '\n';
  for (const auto& cc : eligible) {
    auto langs = spoken[cc];
    if (langs.empty()) {
      for (const auto& e : all)
        if (const auto it = geo.countries.find(e.user_id); it != geo.countries.end() && it->second == cc)
          langs.insert(e.lang);
    }
    try {
      countries << cc << '\t' << dominant_language(all, cc, geo.countries, langs) << '\n';
    } catch (const Error& e) {
      note("geolocate: country " + cc + " dropped: " + e.what());
    }
  }
  if (eligible.empty()) note("geolocate: no country passes min_users=" + std::to_string(config_.min_users));

  std::ostringstream users, excluded, flagged;
  users << "# " << comment() << '\n';
  const std::map<std::string, CountryCode> sorted(geo.countries.begin(), geo.countries.end());
  for (const auto& [u, c] : sorted) users << u << '\t' << c << '\n';
  excluded << "# " << comment() << "\nuser\treason\n";
  for (const auto& x : geo.excluded) excluded << x.user_id << '\t' << x.reason << '\n';
  flagged << "# " << comment() << "\nuser\tperiod\tretweeting\tretweeted\tshare\n";
  for (const auto& f : geo.flagged)
    flagged << f.user_id << '\t' << f.period << '\t' << f.retweeting_country << '\t' << f.retweeted_country << '\t'
            << format_real(f.share) << '\n';
  write_file(config_.out / "geolocate" / "user_geo.tsv", users.str());
  write_file(config_.out / "geolocate" / "excluded.tsv", excluded.str());
  write_file(config_.out / "geolocate" / "flagged.tsv", flagged.str());
  write_file(config_.out / "geolocate" / "countries.tsv", countries.str());
}

void Pipeline::build_graphs() {
  const auto langs = country_langs();
  const auto geo = load_user_geo(require("geolocate", "geolocate/user_geo.tsv"));
  std::vector<Unit> todo;
  for (const auto& [cc, _] : langs)
    for (const auto& p : periods())
      if (Unit u{cc, p.name}; selected(u)) todo.push_back(u);
  for (const auto& p : periods()) period_events(p.name);

  struct Built {
    WeightedGraph rt, co;
  };
  const auto built = parallel_map<Built>(todo.size(), config_.workers, [&](std::size_t i) {
    const auto& u = todo[i];
    const auto& events = events_.at(u.period);
    const auto& lang = langs.at(u.country);
    Built b;
    b.rt = giant_component(prune(build_rt_graph(events, u.country, lang, geo), config_.prune_rt, config_.prune_co));
    b.co = giant_component(prune(build_co_graph(events, u.country, lang, geo), config_.prune_rt, config_.prune_co));
    return b;
  });

  std::ostringstream summary;
  summary << "# " << comment() << "\ncountry\tperiod\tkind\tnodes\tedges\n";
  for (std::size_t i = 0; i < todo.size(); ++i) {
    const auto& u = todo[i];
    for (const auto& [kind, g] : {std::pair<std::string, const WeightedGraph*>{"rt", &built[i].rt}, {"co", &built[i].co}}) {
      if (g->edge_count() == 0) {
        note("build-graphs: " + u.tag() + " " + kind + " network is empty, skipped");
        continue;
      }
      save_graph(config_.out / "graphs" / (u.tag() + "_" + kind + ".tsv"), *g, comment());
      summary << u.country << '\t' << u.period << '\t' << kind << '\t' << g->node_count() << '\t' << g->edge_count()
              << '\n';
    }
  }
  write_file(config_.out / "graphs" / "summary.tsv", summary.str());
}

void Pipeline::cluster() {
  struct Job {
    Unit unit;
    std::string kind;
  };
  std::vector<Job> jobs;
  for (const auto& row : read_table(require("build-graphs", "graphs/summary.tsv"))) {
    if (row.size() < 3 || row[0] == "country") continue;
    Unit u{row[0], row[1]};
    if (selected(u)) jobs.push_back({u, row[2]});
  }
  SelectionOptions sel;
  sel.dominance = config_.dominance;
  const auto rows = parallel_map<std::string>(jobs.size(), config_.workers, [&](std::size_t i) {
    const auto& j = jobs[i];
    const auto base = config_.out / "clusters" / (j.unit.tag() + "_" + j.kind);
    const auto graph = load_graph(config_.out / "graphs" / (j.unit.tag() + "_" + j.kind + ".tsv"));
    const auto dendrogram = paris_dendrogram(graph);
    const auto s = select_partition(graph, dendrogram, sel);
    save_dendrogram(base.string() + ".dendrogram.tsv", dendrogram, comment());
    save_partition(base.string() + ".partition.tsv", s.partition, comment());
    const auto sizes = s.partition.community_sizes();
    std::ostringstream row;
    row << j.unit.country << '\t' << j.unit.period << '\t' << j.kind << '\t' << graph.node_count() << '\t' << s.k
        << '\t' << format_real(s.modularity) << '\t'
        << format_real(static_cast<double>(sizes.front()) / static_cast<double>(graph.node_count())) << '\t';
    for (std::size_t e = 0; e < s.evaluated.size(); ++e)
      row << (e ? "," : "") << s.evaluated[e].first << ':' << format_real(s.evaluated[e].second);
    row << '\n';
    return row.str();
  });
  std::ostringstream out;
  out << "# " << comment() << "\ncountry\tperiod\tkind\tnodes\tk\tmodularity\tlargest_share\tevaluated\n";
  for (const auto& r : rows) out << r;
  write_file(config_.out / "clusters" / "selection.tsv", out.str());
}

namespace {

std::vector<LabelRecord> load_label_files(const std::vector<fs::path>& paths) {
  std::vector<LabelRecord> records;
  for (const auto& p : paths) {
    if (!fs::exists(p)) continue;
    auto r = load_labels(p);
    records.insert(records.end(), r.begin(), r.end());
  }
  return records;
}

}  // namespace

void Pipeline::sample(int round) {
  if (round != 1 && round != 2) throw InvalidArgument("sample: round must be 1 or 2");
  require("cluster", "clusters/selection.tsv");
  const auto todo = units("build-graphs");

  std::map<std::string, LabelCounts> round1;
  if (round == 2) {
    const auto records = load_label_files(config_.labels);
    round1 = count_labels(records, 1);
    if (round1.empty())
      throw MissingPrerequisite("sample --round 1 labels",
                                config_.labels.empty() ? config_.out / "labels" : config_.labels.front());
  }

  std::ostringstream out;
  out << "# " << comment() << "\ncommunity_id\ttweet_id\tuser_id\ttext\n";
  for (const auto& u : todo) {
    const auto partition = load_partition(require("cluster", "clusters/" + u.tag() + "_rt.partition.tsv"));
    const auto events = authored_by(period_events(u.period), partition);
    std::vector<SampleItem> items;
    if (round == 1) {
      items = sample_round1(partition, events, config_.sample_n, config_.min_frac, mix_seed(config_.seed, fnv1a64(u.tag())));
    } else {
      std::map<std::uint32_t, LabelCounts> counts;
      for (std::uint32_t c = 0; c < partition.community_count(); ++c)
        if (const auto it = round1.find(community_id(u, "rt", c)); it != round1.end()) counts[c] = it->second;
      items = sample_round2(partition, events, counts, config_.round2_top, config_.round2_exclude);
    }
    std::unordered_map<std::string, const TweetEvent*> by_id;
    for (const auto& e : events) by_id.emplace(e.tweet_id, &e);
    for (const auto& it : items) {
      const auto* e = by_id.at(it.tweet_id);
      out << community_id(u, "rt", it.community) << '\t' << it.tweet_id << '\t' << e->user_id << '\t'
          << tsv_safe(e->text) << '\n';
    }
  }
  write_file(config_.out / "samples" / ("round" + std::to_string(round) + ".tsv"), out.str());
}

void Pipeline::classify() {
  const auto records = load_label_files(config_.labels);
  if (records.empty())
    throw MissingPrerequisite("labels", config_.labels.empty() ? config_.out / "labels" : config_.labels.front());
  const auto map = classify_communities(records, config_.stance_threshold);
  save_stance_map(config_.out / "stance" / "stance.tsv", map, comment());

  // Inter-annotator agreement on items labelled by two annotators.
  std::map<std::pair<int, std::string>, std::vector<const LabelRecord*>> by_item;
  for (const auto& r : records) by_item[{r.round, r.tweet_id}].push_back(&r);
  std::vector<Label> a, b;
  for (const auto& [_, rs] : by_item) {
    for (std::size_t j = 1; j < rs.size(); ++j) {
      if (rs[j]->annotator_id != rs[0]->annotator_id) {
        a.push_back(rs[0]->label);
        b.push_back(rs[j]->label);
        break;
      }
    }
  }
  std::ostringstream out;
  out << "# " << comment() << "\nmode\titems\tkappa\n";
  for (const auto& [mode, name] : {std::pair{KappaMode::three_class, "three_class"}, {KappaMode::pro_vs_novax, "pro_vs_novax"}}) {
    std::optional<double> k;
    try {
      k = cohen_kappa(a, b, mode);
    } catch (const Error&) {
    }
    out << name << '\t' << a.size() << '\t' << opt_real(k) << '\n';
  }
  write_file(config_.out / "stance" / "kappa.tsv", out.str());
}

void Pipeline::metrics() {
  require("cluster", "clusters/selection.tsv");
  const auto todo = units("build-graphs");
  const auto stances = load_stances(config_.out);
  if (!stances) note("metrics: no stance labels, RWC skipped; NMI computed");

  struct Rows {
    std::string text;
    std::vector<std::string> notes;
  };
  const auto results = parallel_map<Rows>(todo.size(), config_.workers, [&](std::size_t i) {
    const auto& u = todo[i];
    Rows r;
    std::ostringstream out;
    const auto row = [&](std::string_view metric, const std::optional<double>& v, std::optional<double> se = {}) {
      out << u.country << '\t' << u.period << '\t' << metric << '\t' << opt_real(v) << '\t' << opt_real(se) << '\n';
    };
    const auto rt = load_graph(config_.out / "graphs" / (u.tag() + "_rt.tsv"));
    const auto rt_part = load_partition(config_.out / "clusters" / (u.tag() + "_rt.partition.tsv"));
    row("rt_nodes", static_cast<double>(rt.node_count()));
    row("rt_edges", static_cast<double>(rt.edge_count()));
    row("rt_communities", static_cast<double>(rt_part.community_count()));
    row("rt_modularity", modularity(rt, rt_part));

    const auto co_path = config_.out / "graphs" / (u.tag() + "_co.tsv");
    std::optional<WeightedGraph> co;
    std::optional<Partition> co_part;
    if (fs::exists(co_path)) {
      co = load_graph(co_path);
      co_part = load_partition(config_.out / "clusters" / (u.tag() + "_co.partition.tsv"));
      row("co_nodes", static_cast<double>(co->node_count()));
      row("co_edges", static_cast<double>(co->edge_count()));
      row("co_communities", static_cast<double>(co_part->community_count()));
      row("co_modularity", modularity(*co, *co_part));
    }

    if (stances) {
      const auto cs = unit_stances(*stances, u, rt_part);
      std::vector<std::string> side_x;
      for (std::size_t n = 0; n < rt_part.size(); ++n)
        if (cs.at(rt_part.community[n]) == Stance::A) side_x.push_back(rt_part.nodes[n]);
      row("novax_share", static_cast<double>(side_x.size()) / static_cast<double>(rt_part.size()));
      if (side_x.empty() || side_x.size() == rt_part.size()) {
        r.notes.push_back("metrics: " + u.tag() + " has a single stance, RWC skipped");
      } else {
        const auto sides = Bipartition::from_side_x(rt, side_x);
        const auto k = config_.k_absorb ? AbsorbCounts{*config_.k_absorb, *config_.k_absorb} : default_absorb_counts(sides);
        WalkOptions walk;
        walk.reversed = config_.walk_reversed;
        try {
          row("rwc", rwc_exact(rt, sides, k, walk).rwc);
          if (config_.n_walks > 0) {
            const auto mc = rwc_montecarlo(rt, sides, k, config_.n_walks, mix_seed(config_.seed, fnv1a64(u.tag())), walk);
            row("rwc_mc", mc.rwc, mc.std_error);
          }
        } catch (const Error& e) {
          r.notes.push_back("metrics: " + u.tag() + " RWC failed: " + e.what());
        }
      }
    }
    if (co_part) {
      try {
        row("nmi_rt_co", nmi(rt_part, *co_part));
      } catch (const InvalidArgument&) {
        r.notes.push_back("metrics: " + u.tag() + " RT and CO networks share no users, NMI skipped");
      }
      row("node_overlap", overlap_coefficient(rt.nodes(), co->nodes()));
    }
    r.text = out.str();
    return r;
  });

  std::ostringstream out, notes;
  out << "# " << comment() << "\ncountry\tperiod\tmetric\tvalue\tstderr\n";
  for (const auto& r : results) {
    out << r.text;
    for (const auto& n : r.notes) note(n);
  }
  for (const auto& n : notes_)
    if (n.starts_with("metrics:")) notes << n << '\n';
  write_file(config_.out / "metrics" / "metrics.tsv", out.str());
  write_file(config_.out / "metrics" / "notes.txt", notes.str());
}

void Pipeline::flows() {
  const auto langs = country_langs();
  const auto geo = load_user_geo(require("geolocate", "geolocate/user_geo.tsv"));
  std::vector<CountryCode> countries;
  for (const auto& [cc, _] : langs)
    if (options_.countries.empty() || options_.countries.contains(cc)) countries.push_back(cc);
  const auto stances = load_stances(config_.out);
  const auto domains = load_domains(config_.domain_lists);
  std::optional<ShortenerMap> shorteners;
  if (config_.shorteners) shorteners = ShortenerMap::load(*config_.shorteners);
  const bool have_units = fs::exists(config_.out / "graphs" / "summary.tsv");

  std::ostringstream summary;
  summary << "# " << comment() << "\nperiod\tkind\tfile\n";
  const auto emit = [&](const std::string& period, const FlowMatrix& m, bool svg) {
    const auto name = period + "_" + std::string(to_string(m.kind));
    save_flow_csv(config_.out / "flows" / (name + ".csv"), m, comment());
    summary << period << '\t' << to_string(m.kind) << '\t' << name << ".csv\n";
    if (svg) write_file(config_.out / "flows" / (name + ".svg"), flow_svg(m, period + " " + std::string(to_string(m.kind))));
  };
  for (const auto& p : periods()) {
    if (!options_.periods.empty() && !options_.periods.contains(p.name)) continue;
    const auto& events = period_events(p.name);
    const auto raw = raw_rt_matrix(events, geo, countries);
    emit(p.name, to_flow_matrix(raw), false);
    emit(p.name, normalize_flow(raw), true);

    if (stances && have_units) {
      StanceCohorts cohorts;
      for (const auto& cc : countries) {
        const Unit u{cc, p.name};
        const auto path = config_.out / "clusters" / (u.tag() + "_rt.partition.tsv");
        if (!fs::exists(path)) continue;
        const auto part = load_partition(path);
        const auto cs = unit_stances(*stances, u, part);
        auto& m = cohorts[cc];
        for (std::size_t n = 0; n < part.size(); ++n) m.emplace(part.nodes[n], cs.at(part.community[n]));
      }
      emit(p.name, density_ratio(events, cohorts, countries).theta, true);
    } else {
      note("flows: " + p.name + " density ratio skipped, no stance labels");
    }

    if (domains.size() > 0) {
      const auto imports = lowcred_import_matrix(events, geo, countries, domains, shorteners ? &*shorteners : nullptr,
                                                 config_.min_lowcred_imports);
      emit(p.name, imports.rate, false);
      emit(p.name, imports.share, false);
    } else {
      note("flows: " + p.name + " low-credibility imports skipped, no domain list");
    }
  }
  write_file(config_.out / "flows" / "summary.tsv", summary.str());
}

void Pipeline::cohorts() {
  const auto todo = units("build-graphs");
  require("cluster", "clusters/selection.tsv");
  const auto langs = country_langs();
  const auto stances = load_stances(config_.out);
  const auto domains = load_domains(config_.domain_lists);
  std::optional<ShortenerMap> shorteners;
  if (config_.shorteners) shorteners = ShortenerMap::load(*config_.shorteners);
  std::optional<AccountStatus> status;
  if (config_.status) status = AccountStatus::load(*config_.status);
  else note("cohorts: no status snapshot, suspension statistics skipped");
  std::unordered_map<std::string, Timestamp> last;
  if (status) last = last_tweet_times(parse_events_file(config_.events).events);

  std::ostringstream behavior, suspension, daily;
  behavior << "# " << comment() << "\ncountry,period,cohort,users,avg_retweets,avg_urls,avg_youtube_urls,lowcred_fraction\n";
  suspension << "# " << comment() << "\ncountry,period,cohort,users,covered,suspended,proportion\n";
  daily << "# " << comment() << "\ncountry,date,suspended\n";

  std::map<CountryCode, std::set<std::string>> country_users;
  for (const auto& u : todo) {
    const auto part = load_partition(config_.out / "clusters" / (u.tag() + "_rt.partition.tsv"));
    std::optional<CommunityStances> cs;
    if (stances) cs = unit_stances(*stances, u, part);
    const bool lowcred_ok = config_.lowcred_languages.empty() || config_.lowcred_languages.contains(langs.at(u.country));
    for (const auto& s : cohort_behavior(period_events(u.period), part, cs, domains, shorteners ? &*shorteners : nullptr)) {
      behavior << u.country << ',' << u.period << ',' << s.cohort << ',' << s.n_users << ',' << format_real(s.avg_retweets)
               << ',' << format_real(s.avg_urls) << ',' << format_real(s.avg_youtube_urls) << ','
               << (lowcred_ok && domains.size() > 0 ? opt_real(s.lowcred_fraction) : "NA") << '\n';
    }
    if (status) {
      const auto st = suspension_stats(part, cs, *status, last);
      for (const auto& c : st.cohorts)
        suspension << u.country << ',' << u.period << ',' << c.cohort << ',' << c.n_users << ',' << c.covered << ','
                   << c.suspended << ',' << format_real(c.proportion()) << '\n';
      for (const auto& w : st.warnings) note("cohorts: " + u.tag() + ": " + w);
    }
    country_users[u.country].insert(part.nodes.begin(), part.nodes.end());
  }
  if (status) {
    for (const auto& [cc, users] : country_users) {
      std::vector<std::string> nodes(users.begin(), users.end());
      const auto part = Partition::from_labels(nodes, std::vector<std::uint64_t>(nodes.size(), 0));
      for (const auto& [date, n] : suspension_stats(part, std::nullopt, *status, last).daily)
        daily << cc << ',' << date << ',' << n << '\n';
    }
  }
  write_file(config_.out / "cohorts" / "behavior.csv", behavior.str());
  write_file(config_.out / "cohorts" / "suspension.csv", suspension.str());
  write_file(config_.out / "cohorts" / "suspension_daily.csv", daily.str());
}

void Pipeline::report() {
  const auto metrics_path = require("metrics", "metrics/metrics.tsv");
  const auto flows_path = require("flows", "flows/summary.tsv");
  const auto behavior_path = require("cohorts", "cohorts/behavior.csv");
  const auto report_dir = config_.out / "report";
  const auto head = "# " + comment() + "\n";

  // Per-network summary: users, no-vax share, RWC, NMI.
  std::map<std::pair<std::size_t, std::string>, std::map<std::string, std::pair<std::string, std::string>>> fig2;
  std::map<std::string, std::size_t> period_order;
  for (const auto& p : periods()) period_order.emplace(p.name, period_order.size());
  for (const auto& row : read_table(metrics_path)) {
    if (row.size() != 5 || row[0] == "country") continue;
    const auto po = period_order.count(row[1]) ? period_order.at(row[1]) : period_order.size();
    fig2[{po, row[0]}][row[2]] = {row[3], row[4]};
  }
  // Rows ordered by country, then period as configured.
  std::vector<std::pair<std::string, std::size_t>> keys;
  for (const auto& [k, _] : fig2) keys.emplace_back(k.second, k.first);
  std::sort(keys.begin(), keys.end());
  std::vector<std::string> period_names(period_order.size());
  for (const auto& [name, i] : period_order) period_names[i] = name;
  std::ostringstream f2;
  f2 << head << "country,period,users,novax_share,rwc,rwc_mc,rwc_mc_stderr,nmi_rt_co,rt_modularity\n";
  for (const auto& [cc, po] : keys) {
    const auto& m = fig2.at({po, cc});
    const auto get = [&](const std::string& k, bool se = false) {
      const auto it = m.find(k);
      return it == m.end() ? std::string("NA") : (se ? it->second.second : it->second.first);
    };
    f2 << cc << ',' << (po < period_names.size() ? period_names[po] : "?") << ',' << get("rt_nodes") << ','
       << get("novax_share") << ',' << get("rwc") << ',' << get("rwc_mc") << ',' << get("rwc_mc", true) << ','
       << get("nmi_rt_co") << ',' << get("rt_modularity") << '\n';
  }
  write_file(report_dir / "fig2_networks.csv", f2.str());

  const auto copy_csv = [&](const fs::path& from, const fs::path& to) {
    std::ostringstream o;
    o << head;
    for (const auto& line : read_data_lines(from)) o << line << '\n';
    write_file(to, o.str());
  };
  copy_csv(behavior_path, report_dir / "fig3_cohorts.csv");

  // Mean suspension proportion over periods per country and cohort.
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> susp;
  const auto susp_path = require("cohorts", "cohorts/suspension.csv");
  for (const auto& row : read_table(susp_path, ',')) {
    if (row.size() != 7 || row[0] == "country") continue;
    auto& acc = susp[{row[0], row[2]}];
    acc.first += std::stod(row[6]);
    ++acc.second;
  }
  std::ostringstream f4a;
  f4a << head << "country,cohort,periods,mean_suspended_proportion\n";
  for (const auto& [k, acc] : susp)
    f4a << k.first << ',' << k.second << ',' << acc.second << ','
        << format_real(acc.first / static_cast<double>(acc.second)) << '\n';
  write_file(report_dir / "fig4_suspended.csv", f4a.str());
  copy_csv(require("cohorts", "cohorts/suspension_daily.csv"), report_dir / "fig4_suspended_daily.csv");

  for (const auto& row : read_table(flows_path)) {
    if (row.size() != 3 || row[0] == "period") continue;
    const auto stem = fs::path(row[2]).stem().string();
    copy_csv(config_.out / "flows" / row[2], report_dir / ("fig5_" + stem + ".csv"));
    const auto svg = config_.out / "flows" / (stem + ".svg");
    if (fs::exists(svg)) write_file(report_dir / ("fig5_" + stem + ".svg"), read_file(svg));
  }
}

void run_synth(const fs::path& spec_path, const fs::path& dir, std::optional<std::uint64_t> seed) {
  auto spec = CorpusSpec::load(spec_path);
  if (seed) spec.seed = *seed;
  write_corpus(dir, spec, synth_corpus(spec));
}

fs::path run_synth_annotate(const Pipeline& pipeline, const fs::path& truth_dir, int round) {
  const auto samples_path = pipeline.out() / "samples" / ("round" + std::to_string(round) + ".tsv");
  if (!fs::exists(samples_path)) throw MissingPrerequisite("sample", samples_path);
  std::vector<std::pair<std::string, std::string>> samples;
  for (const auto& row : read_table(samples_path)) {
    if (row.size() < 2 || row[0] == "community_id") continue;
    samples.emplace_back(row[0], row[1]);
  }
  const auto events = parse_events_file(pipeline.config().events).events;
  const auto records = simulate_labels(samples, events, load_truth(truth_dir), round, pipeline.config().seed);
  const auto& labels = pipeline.config().labels;
  const auto target = static_cast<std::size_t>(round) <= labels.size()
                          ? labels[static_cast<std::size_t>(round) - 1]
                          : truth_dir / "labels" / ("round" + std::to_string(round) + ".tsv");
  save_labels(target, records);
  return target;
}

}  // namespace polarnet
