#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "polarnet/cluster.hpp"
#include "polarnet/graph.hpp"
#include "polarnet/ingest.hpp"

namespace fixtures {

inline polarnet::TweetEvent post(std::string id, std::string user, std::string when = "2021-01-01T00:00:00Z",
                                 std::string lang = "en", std::string text = "vaccine news") {
  polarnet::TweetEvent e;
  e.tweet_id = std::move(id);
  e.user_id = std::move(user);
  e.timestamp = polarnet::parse_timestamp(when);
  e.lang = std::move(lang);
  e.text = std::move(text);
  return e;
}

inline polarnet::TweetEvent retweet(std::string id, std::string user, std::string of_user, std::string of_tweet = "x",
                                    std::string when = "2021-01-01T00:00:00Z", std::string lang = "en") {
  auto e = post(std::move(id), std::move(user), std::move(when), std::move(lang), "RT vaccine");
  e.retweeted_user_id = std::move(of_user);
  e.retweeted_tweet_id = std::move(of_tweet);
  return e;
}

struct WEdge {
  std::string u, v;
  std::int64_t w = 1;
};

inline polarnet::WeightedGraph graph(bool directed, const std::vector<WEdge>& edges) {
  polarnet::GraphBuilder b(directed);
  for (const auto& e : edges) b.add_edge(e.u, e.v, e.w);
  return std::move(b).build();
}

// Two unit-weight triangles {a,b,c} and {d,e,f} joined by the bridge c-d.
inline polarnet::WeightedGraph two_triangles() {
  return graph(false, {{"a", "b"}, {"b", "c"}, {"a", "c"}, {"d", "e"}, {"e", "f"}, {"d", "f"}, {"c", "d"}});
}

// Connected random undirected graph: a random spanning tree plus extra edges.
inline polarnet::WeightedGraph random_connected(std::mt19937_64& rng, std::size_t n, double p_extra, int max_w = 5) {
  std::uniform_int_distribution<int> w(1, max_w);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  polarnet::GraphBuilder b(false);
  const auto name = [](std::size_t i) { return "n" + std::to_string(100 + i); };
  for (std::size_t i = 1; i < n; ++i) b.add_edge(name(i), name(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)), w(rng));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (unit(rng) < p_extra) b.add_edge(name(i), name(j), w(rng));
  return std::move(b).build();
}

// Modularity as the double sum over node pairs of the symmetrized adjacency.
inline double brute_modularity(const polarnet::WeightedGraph& g, const polarnet::Partition& p) {
  const auto n = g.node_count();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) {
    a[e.source][e.target] += static_cast<double>(e.weight);
    a[e.target][e.source] += static_cast<double>(e.weight);
  }
  std::vector<double> k(n, 0.0);
  double two_m = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      k[i] += a[i][j];
      two_m += a[i][j];
    }
  // Community lookup by node name (the partition may list nodes in any order).
  double q = 0.0;
  std::vector<std::uint32_t> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = *p.community_of(g.name(static_cast<polarnet::NodeIndex>(i)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i] == c[j]) q += a[i][j] - k[i] * k[j] / two_m;
  return q / two_m;
}

// Cohen's kappa straight from its definition.
inline double kappa_oracle(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, double> ca, cb;
  double agree = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    if (a[i] == b[i]) agree += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double pe = 0.0;
  for (const auto& [label, x] : ca)
    if (cb.count(label)) pe += (x / n) * (cb[label] / n);
  return (agree / n - pe) / (1.0 - pe);
}

// NMI from the contingency table, arithmetic-mean normalization.
inline double nmi_oracle(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  std::map<std::uint32_t, double> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double ha = 0.0, hb = 0.0, mi = 0.0;
  for (const auto& [_, c] : ca) ha -= c / n * std::log(c / n);
  for (const auto& [_, c] : cb) hb -= c / n * std::log(c / n);
  for (const auto& [k, c] : joint) mi += c / n * std::log(c * n / (ca[k.first] * cb[k.second]));
  if (ca.size() == 1 && cb.size() == 1) return 1.0;
  if (ca.size() == 1 || cb.size() == 1) return 0.0;
  return 2.0 * mi / (ha + hb);
}

}  // namespace fixtures
