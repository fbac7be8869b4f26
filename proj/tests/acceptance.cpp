// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "polarnet/annotate.hpp"
#include "polarnet/cluster.hpp"
#include "polarnet/flows.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/lowcred.hpp"
#include "polarnet/pipeline.hpp"
#include "polarnet/polarization.hpp"
#include "polarnet/synth.hpp"

using namespace polarnet;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kRwcMcTol = 0.02;
constexpr double kRwcMcSeconds = 10.0;
constexpr double kRwcNullTol = 0.05;
constexpr double kModularityTol = 1e-12;
constexpr double kTwoTriangleQ = 0.357143;
constexpr double kTwoTriangleTol = 1e-6;
constexpr double kRecoveryNmi = 0.95;
constexpr int kRecoverySeeds = 20;
constexpr int kRecoveryNeeded = 18;
constexpr double kRecoverySeconds = 30.0;
constexpr double kDominance = 0.9;
constexpr double kRandomNmiMean = 0.01;
constexpr double kFlowTol = 1e-9;
constexpr double kThetaTol = 1e-12;
constexpr double kEndToEndNmi = 0.9;
constexpr double kLowcredTol = 0.02;
constexpr double kEndToEndSeconds = 120.0;
constexpr double kKappaTol = 1e-12;
constexpr double kPerfSeconds = 60.0;
constexpr double kPerfMaxRssGb = 2.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

void run(const std::string& name, const std::function<std::pair<bool, std::string>()>& check) {
  try {
    const auto [ok, detail] = check();
    report(name, ok, detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

Bipartition first_block(const WeightedGraph& g, std::size_t block_size) {
  std::vector<std::string> x;
  for (const auto& n : g.nodes())
    if (std::stoul(n.substr(1)) < block_size) x.push_back(n);
  return Bipartition::from_side_x(g, x);
}

std::pair<bool, std::string> rwc_exactness() {
  const SbmSpec spec{{200, 200}, 0.05, 0.001, 1.0, 2024};
  const auto g = giant_component(sbm_generate(spec));
  const auto sides = first_block(g, 200);
  const auto k = default_absorb_counts(sides);
  const auto exact = rwc_exact(g, sides, k);
  const auto t0 = Clock::now();
  const auto mc = rwc_montecarlo(g, sides, k, 100000, 7);
  const double secs = seconds_since(t0);

  // Two 10-node cliques with no edge between them.
  std::vector<fixtures::WEdge> edges;
  for (const char side : {'x', 'y'})
    for (int i = 0; i < 10; ++i)
      for (int j = i + 1; j < 10; ++j)
        edges.push_back({std::string(1, side) + std::to_string(i), std::string(1, side) + std::to_string(j)});
  const auto split = fixtures::graph(false, edges);
  std::vector<std::string> x;
  for (const auto& n : split.nodes())
    if (n[0] == 'x') x.push_back(n);
  const double disconnected = rwc_exact(split, Bipartition::from_side_x(split, x), 2).rwc;

  const double diff = std::abs(mc.rwc - exact.rwc);
  const bool ok = diff <= kRwcMcTol && secs < kRwcMcSeconds && disconnected == 1.0;
  return {ok, fmt("exact %.4f, montecarlo %.4f (|diff| %.4f); ", exact.rwc, mc.rwc, diff) +
                  fmt("montecarlo %.2f s; disconnected fixture %.17g", secs, disconnected)};
}

std::pair<bool, std::string> rwc_null() {
  std::vector<fixtures::WEdge> edges;
  for (int i = 0; i < 20; ++i)
    for (int j = i + 1; j < 20; ++j) edges.push_back({"k" + std::to_string(10 + i), "k" + std::to_string(10 + j)});
  const auto g = fixtures::graph(false, edges);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto nodes = g.nodes();
    std::mt19937_64 rng(seed);
    std::shuffle(nodes.begin(), nodes.end(), rng);
    nodes.resize(10);
    worst = std::max(worst, std::abs(rwc_exact(g, Bipartition::from_side_x(g, nodes), 2).rwc));
  }
  return {worst < kRwcNullTol, fmt("max |rwc| over 10 random even splits of K20 = %.3g", worst)};
}

std::pair<bool, std::string> modularity_oracle() {
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = fixtures::random_connected(rng, 2 + rng() % 19, 0.2);
    std::vector<std::uint64_t> labels;
    const auto classes = 1 + rng() % 5;
    for (std::size_t i = 0; i < g.node_count(); ++i) labels.push_back(rng() % classes);
    const auto p = Partition::from_labels(g.nodes(), labels);
    worst = std::max(worst, std::abs(modularity(g, p) - fixtures::brute_modularity(g, p)));
  }
  const auto g = fixtures::two_triangles();
  const double q = modularity(g, Partition::from_labels(g.nodes(), {0, 0, 0, 1, 1, 1}));
  const bool ok = worst <= kModularityTol && std::abs(q - kTwoTriangleQ) <= kTwoTriangleTol;
  return {ok, fmt("max |Q - brute| over 50 graphs = %.3g; two triangles Q = %.7f", worst, q)};
}

std::pair<bool, std::string> clustering_recovery() {
  const auto t0 = Clock::now();
  int good = 0;
  double lowest = 1.0;
  for (int seed = 1; seed <= kRecoverySeeds; ++seed) {
    const SbmSpec spec{{100, 100, 100}, 0.1, 0.005, 1.0, static_cast<std::uint64_t>(seed)};
    const auto g = giant_component(sbm_generate(spec));
    const auto s = select_partition(g, paris_dendrogram(g));
    const double x = nmi(s.partition, sbm_truth(spec));
    lowest = std::min(lowest, x);
    good += x >= kRecoveryNmi;
  }
  const double secs = seconds_since(t0);
  return {good >= kRecoveryNeeded && secs < kRecoverySeconds,
          fmt("%g of 20 seeds with NMI >= 0.95 (lowest %.4f), %.2f s", good, lowest, secs)};
}

std::pair<bool, std::string> selection_guarantee() {
  std::mt19937_64 rng(41);
  int ok_graphs = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = fixtures::random_connected(rng, 5 + rng() % 60, 0.02 + 0.04 * (trial % 5));
    const auto s = select_partition(g, paris_dendrogram(g));
    const auto largest = static_cast<double>(s.partition.community_sizes().front());
    const bool covered = largest <= kDominance * static_cast<double>(g.node_count()) || s.k == g.node_count();
    ok_graphs += s.partition.community_count() >= 2 && covered;
  }
  return {ok_graphs == 50, fmt("%g of 50 random connected graphs satisfy the guarantee", ok_graphs)};
}

std::pair<bool, std::string> nmi_properties() {
  std::mt19937_64 rng(51);
  bool self_ok = true, perm_ok = true;
  double mean = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    std::mt19937_64 r(1000 + seed);
    std::vector<std::uint32_t> a(10000), b(10000);
    for (auto& v : a) v = static_cast<std::uint32_t>(r() % 5);
    for (auto& v : b) v = static_cast<std::uint32_t>(r() % 5);
    mean += nmi_labels(a, b) / 20.0;
    self_ok = self_ok && nmi_labels(a, a) == 1.0;
    std::vector<std::uint32_t> perm = {0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    auto pa = a;
    for (auto& v : pa) v = perm[v];
    perm_ok = perm_ok && nmi_labels(pa, b) == nmi_labels(a, b);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < 200; ++i) names.push_back("n" + std::to_string(i));
    const auto p = Partition::from_labels(names, std::vector<std::uint64_t>(a.begin(), a.begin() + 200));
    self_ok = self_ok && nmi(p, p) == 1.0;
  }
  return {self_ok && perm_ok && mean < kRandomNmiMean,
          std::string("self ") + (self_ok ? "exact" : "inexact") + ", permutation " + (perm_ok ? "exact" : "inexact") +
              fmt(", mean random NMI %.3g", mean)};
}

std::pair<bool, std::string> flow_normalization() {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.5, 50.0);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % 8);
    Eigen::VectorXd so(k), si(k);
    for (Eigen::Index i = 0; i < k; ++i) so(i) = u(rng), si(i) = u(rng);
    si *= so.sum() / si.sum();
    std::vector<CountryCode> cc;
    for (Eigen::Index i = 0; i < k; ++i) cc.push_back("C" + std::to_string(i));
    const auto n = normalize_flow({cc, so * si.transpose() / so.sum()});
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        if (i != j) worst = std::max(worst, std::abs(n.values(i, j) - 1.0));
  }
  // Marginal identity on event-built count fixtures.
  bool marginals = true;
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<CountryCode> cc = {"AA", "BB", "CC", "DD"};
    UserCountries geo;
    for (int u2 = 0; u2 < 40; ++u2) geo["u" + std::to_string(u2)] = cc[u2 % 4];
    std::vector<TweetEvent> events;
    for (int i = 0; i < 500; ++i)
      events.push_back(fixtures::retweet(std::to_string(i), "u" + std::to_string(rng() % 44), "u" + std::to_string(rng() % 44)));
    const auto raw = raw_rt_matrix(events, geo, cc);
    marginals = marginals && raw.out_strength().sum() == raw.total() && raw.in_strength().sum() == raw.total();
  }
  return {worst <= kFlowTol && marginals,
          fmt("max |n_ij - 1| = %.3g; marginal identity ", worst) + (marginals ? "exact" : "violated")};
}

std::pair<bool, std::string> theta_arithmetic() {
  double theta = 0.0;
  theta_cell(0.05, 0.005, theta);
  const double direct = theta;

  // Hand fixture: 10 A and 100 O users per country, E^A = 5, E^O = 50 from FR to DE.
  StanceCohorts cohorts;
  std::vector<TweetEvent> events;
  for (const CountryCode cc : {"FR", "DE"}) {
    for (int i = 0; i < 10; ++i) cohorts[cc][cc + "A" + std::to_string(i)] = Stance::A;
    for (int i = 0; i < 100; ++i) cohorts[cc][cc + "O" + std::to_string(i)] = Stance::O;
  }
  for (int i = 0; i < 5; ++i) events.push_back(fixtures::retweet("a" + std::to_string(i), "FRA" + std::to_string(i), "DEA0"));
  for (int i = 0; i < 50; ++i) events.push_back(fixtures::retweet("o" + std::to_string(i), "FRO" + std::to_string(i), "DEO0"));
  const std::vector<CountryCode> cc = {"DE", "FR", "IT"};
  const auto dr = density_ratio(events, cohorts, cc);
  const auto fixture = dr.theta.at("FR", "DE");
  const bool stance_mask = !dr.theta.at("FR", "IT") && !dr.theta.at("IT", "FR");

  // Importer with 9 low-cred URLs is masked; with 10 it is not.
  DomainList list;
  list.add("bad.com");
  UserCountries geo = {{"a", "AA"}, {"b", "BB"}, {"c", "CC"}};
  std::vector<TweetEvent> rts;
  for (int i = 0; i < 9; ++i) {
    auto e = fixtures::retweet("x" + std::to_string(i), "a", "b");
    e.urls = {"https://bad.com/" + std::to_string(i)};
    rts.push_back(e);
  }
  for (int i = 0; i < 10; ++i) {
    auto e = fixtures::retweet("y" + std::to_string(i), "b", "c");
    e.urls = {"https://bad.com/" + std::to_string(i)};
    rts.push_back(e);
  }
  const auto imports = lowcred_import_matrix(rts, geo, {"AA", "BB", "CC"}, list);
  const bool import_mask = !imports.share.at("AA", "BB") && imports.share.at("BB", "CC") == std::optional<double>(1.0);

  const bool ok = std::abs(direct - 10.0) <= kThetaTol && fixture && std::abs(*fixture - 10.0) <= kThetaTol &&
                  stance_mask && import_mask;
  return {ok, fmt("theta direct %.17g, fixture %.17g; ", direct, fixture.value_or(NAN)) + "missing stance map " +
                  (stance_mask ? "masked" : "NOT masked") + ", <10 imports " + (import_mask ? "masked" : "NOT masked")};
}

const char* kEndToEndSpec =
    "seed = 42\n"
    "country = US en 500 A:0.3 O:0.7\n"
    "country = FR fr 400 A:0.3 O:0.7\n"
    "country = IT it 400 A:0.3 O:0.7\n"
    "period = P1 2021-01-01T00:00:00Z 2021-04-01T00:00:00Z\n"
    "period = P2 2021-04-01T00:00:00Z 2021-07-01T00:00:00Z\n"
    "lowcred_rate_a = 0.26\n"
    "lowcred_rate_o = 0.024\n"
    "aa_multiplier = 10\n"
    "min_users = 50\n";

fs::path workdir() { return fs::temp_directory_path() / "polarnet_acceptance"; }

Pipeline full_run(const fs::path& corpus, const fs::path& out) {
  RunOptions options;
  options.out = out;
  Pipeline p(PipelineConfig::load(corpus / "pipeline.conf"), options);
  p.run_all_until_labels();
  run_synth_annotate(p, corpus, 1);
  p.sample(2);
  run_synth_annotate(p, corpus, 2);
  for (const auto* stage : {"classify", "metrics", "flows", "cohorts", "report"}) p.run(stage);
  return p;
}

std::vector<std::vector<std::string>> csv_rows(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& line : read_data_lines(path)) {
    const auto fields = split(line, ',');
    rows.emplace_back(fields.begin(), fields.end());
  }
  return rows;
}

std::pair<bool, std::string> end_to_end() {
  const auto dir = workdir();
  fs::remove_all(dir);
  write_file(dir / "spec.txt", kEndToEndSpec);
  const auto t0 = Clock::now();
  run_synth(dir / "spec.txt", dir / "corpus");
  auto p = full_run(dir / "corpus", dir / "run1");
  const double secs = seconds_since(t0);

  const auto spec = CorpusSpec::load(dir / "spec.txt");
  const auto truth = load_truth(dir / "corpus");
  std::vector<std::string> users;
  std::vector<std::uint64_t> labels;
  std::map<std::string, std::uint64_t> ids;
  for (const auto& [user, community] : truth.community) {
    users.push_back(user);
    labels.push_back(ids.emplace(community, ids.size()).first->second);
  }
  const auto truth_partition = Partition::from_labels(users, labels);

  // Partition recovery on every RT network.
  double lowest_nmi = 1.0;
  std::size_t networks = 0;
  const auto stances = load_stance_map(p.out() / "stance" / "stance.tsv");
  const auto domains = DomainList::load(p.config().domain_lists.at(0));
  const auto shorteners = ShortenerMap::load(*p.config().shorteners);
  UrlShareCounts pooled_a, pooled_o;
  for (const auto& period : load_periods(p.config().periods)) {
    std::ifstream in(p.out() / "ingest" / (period.name + ".jsonl"));
    const auto events = parse_events(in).events;
    std::map<std::string, Stance> user_stance;
    for (const auto& entry : fs::directory_iterator(p.out() / "clusters")) {
      const auto name = entry.path().filename().string();
      const auto suffix = "_" + period.name + "_rt.partition.tsv";
      if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) continue;
      const auto tag = name.substr(0, name.size() - std::string("_rt.partition.tsv").size());
      const auto part = load_partition(entry.path());
      lowest_nmi = std::min(lowest_nmi, nmi(part, truth_partition));
      ++networks;
      for (std::size_t i = 0; i < part.size(); ++i) {
        const auto it = stances.stance.find(tag + "_rt_" + std::to_string(part.community[i]));
        user_stance[part.nodes[i]] = it == stances.stance.end() ? Stance::O : it->second;
      }
    }
    std::vector<TweetEvent> a, o;
    for (const auto& e : events)
      if (const auto it = user_stance.find(e.user_id); it != user_stance.end()) (it->second == Stance::A ? a : o).push_back(e);
    const auto ca = count_lowcred_shares(a, domains, &shorteners);
    const auto co = count_lowcred_shares(o, domains, &shorteners);
    pooled_a.shares += ca.shares, pooled_a.lowcred_shares += ca.lowcred_shares;
    pooled_o.shares += co.shares, pooled_o.lowcred_shares += co.lowcred_shares;
  }
  const double frac_a = pooled_a.fraction().value_or(NAN), frac_o = pooled_o.fraction().value_or(NAN);

  // Density ratios between A cohorts.
  std::size_t theta_cells = 0, theta_bad = 0;
  double theta_min = INFINITY;
  for (const auto& period : load_periods(p.config().periods)) {
    const auto rows = csv_rows(p.out() / "flows" / (period.name + "_density-ratio.csv"));
    for (std::size_t r = 1; r < rows.size(); ++r)
      for (std::size_t c = 1; c < rows[r].size(); ++c) {
        if (rows[r][c] == "NA") continue;
        ++theta_cells;
        const double v = rows[r][c] == "Inf" ? INFINITY : std::stod(rows[r][c]);
        theta_min = std::min(theta_min, v);
        theta_bad += !(v > 1.0);
      }
  }

  const bool ok = networks == 6 && lowest_nmi >= kEndToEndNmi && std::abs(frac_a - spec.lowcred_rate_a) <= kLowcredTol &&
                  std::abs(frac_o - spec.lowcred_rate_o) <= kLowcredTol && theta_cells > 0 && theta_bad == 0 &&
                  secs < kEndToEndSeconds;
  return {ok, fmt("%g RT networks, lowest NMI vs truth %.4f; ", static_cast<double>(networks), lowest_nmi) +
                  fmt("lowcred A %.4f (planted %.3f), ", frac_a, spec.lowcred_rate_a) +
                  fmt("O %.4f (planted %.3f); ", frac_o, spec.lowcred_rate_o) +
                  fmt("%g unmasked A-A theta cells, min %.3g, %g not > 1; ", static_cast<double>(theta_cells), theta_min,
                      static_cast<double>(theta_bad)) +
                  fmt("%.1f s", secs)};
}

std::pair<bool, std::string> kappa_oracle() {
  std::mt19937_64 rng(71);
  const std::vector<std::string> classes = {"pro-vax", "no-vax", "other"};
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 10 + rng() % 200;
    std::vector<std::string> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = classes[rng() % 3];
      b[i] = rng() % 2 ? a[i] : classes[rng() % 3];
    }
    worst = std::max(worst, std::abs(cohen_kappa(a, b) - fixtures::kappa_oracle(a, b)));
  }
  const std::vector<std::string> x = {"x", "x", "y", "y"}, y = {"y", "y", "x", "x"};
  const double perfect = cohen_kappa(x, x), anti = cohen_kappa(x, y);
  return {worst <= kKappaTol && perfect == 1.0 && anti == -1.0,
          fmt("max |kappa - oracle| = %.3g; perfect %.17g, antisymmetric %.17g", worst, perfect, anti)};
}

std::pair<bool, std::string> performance() {
  const auto t0 = Clock::now();
  const auto log = synth_retweet_log({100000, 1000000, 10, 0.9, 1});
  const auto g = build_rt_graph(log.events, "US", "en", log.user_geo);
  const auto gc = giant_component(g);
  const auto d = paris_dendrogram(gc);
  const auto s = select_partition(gc, d);
  const double secs = seconds_since(t0);
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double gb = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0);
  return {secs < kPerfSeconds && gb < kPerfMaxRssGb,
          fmt("%g nodes, %g edges", static_cast<double>(g.node_count()), static_cast<double>(g.edge_count())) +
              fmt(", k=%g; %.1f s, peak RSS %.2f GB", static_cast<double>(s.k), secs, gb)};
}

std::pair<bool, std::string> determinism() {
  const auto dir = workdir();
  if (!fs::exists(dir / "run1" / "report")) return {false, "first end-to-end run missing"};
  auto p = full_run(dir / "corpus", dir / "run2");
  std::size_t files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir / "run1" / "report")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto other = p.out() / "report" / fs::relative(entry.path(), dir / "run1" / "report");
    differing += !fs::exists(other) || read_file(entry.path()) != read_file(other);
  }
  fs::remove_all(dir);
  return {files > 0 && differing == 0, fmt("%g report files compared, %g differ", static_cast<double>(files),
                                           static_cast<double>(differing))};
}

}  // namespace

int main() {
  run("rwc-exactness", rwc_exactness);
  run("rwc-null", rwc_null);
  run("modularity-oracle", modularity_oracle);
  run("clustering-recovery", clustering_recovery);
  run("selection-guarantee", selection_guarantee);
  run("nmi-properties", nmi_properties);
  run("flow-normalization", flow_normalization);
  run("theta-arithmetic", theta_arithmetic);
  run("end-to-end", end_to_end);
  run("kappa-oracle", kappa_oracle);
  run("performance", performance);
  run("determinism", determinism);
  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}
