#include "polarnet/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "polarnet/lowcred.hpp"

namespace polarnet {

namespace {

std::uint64_t pack(std::uint32_t u, std::uint32_t v) { return (static_cast<std::uint64_t>(u) << 32) | v; }

struct DisjointSets {
  std::vector<std::uint32_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0U); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;  // root is always the smallest index of its set
  }
};

}  // namespace

std::optional<NodeIndex> WeightedGraph::index_of(std::string_view id) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<NodeIndex>(it - nodes_.begin());
}

std::int64_t WeightedGraph::total_weight() const {
  std::int64_t total = 0;
  for (const auto& e : edges_) total += e.weight;
  return total;
}

WeightedGraph WeightedGraph::induced(const std::vector<bool>& keep) const {
  if (keep.size() != nodes_.size()) throw InvalidArgument("induced: mask size mismatch");
  WeightedGraph g;
  g.directed_ = directed_;
  std::vector<NodeIndex> remap(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<NodeIndex>(g.nodes_.size());
    g.nodes_.push_back(nodes_[i]);
  }
  for (const auto& e : edges_) {
    if (keep[e.source] && keep[e.target]) g.edges_.push_back({remap[e.source], remap[e.target], e.weight});
  }
  // Remapping is monotone, so the edge order is preserved.
  return g;
}

void GraphBuilder::add_node(std::string_view id) { intern(id); }

std::uint32_t GraphBuilder::intern(std::string_view id) {
  if (id.empty()) throw InvalidArgument("empty node id");
  const auto [it, inserted] = ids_.try_emplace(std::string(id), static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.emplace_back(id);
  return it->second;
}

void GraphBuilder::add_edge(std::string_view u, std::string_view v, std::int64_t weight) {
  if (weight <= 0) throw InvalidArgument("edge weight must be positive");
  if (u == v) return;
  auto a = intern(u);
  auto b = intern(v);
  if (!directed_ && b < a) std::swap(a, b);
  weights_[pack(a, b)] += weight;
}

WeightedGraph GraphBuilder::build() && {
  WeightedGraph g;
  g.directed_ = directed_;
  std::vector<std::uint32_t> order(names_.size());
  std::iota(order.begin(), order.end(), 0U);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return names_[a] < names_[b]; });
  std::vector<NodeIndex> remap(names_.size());
  g.nodes_.reserve(names_.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    remap[order[i]] = static_cast<NodeIndex>(i);
    g.nodes_.push_back(std::move(names_[order[i]]));
  }
  g.edges_.reserve(weights_.size());
  for (const auto& [key, w] : weights_) {
    NodeIndex s = remap[static_cast<std::uint32_t>(key >> 32)];
    NodeIndex t = remap[static_cast<std::uint32_t>(key & 0xffffffffULL)];
    if (!directed_ && t < s) std::swap(s, t);
    g.edges_.push_back({s, t, w});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  names_.clear();
  ids_.clear();
  weights_.clear();
  return g;
}

WeightedGraph build_rt_graph(std::span<const TweetEvent> events, const CountryCode& country, std::string_view lang,
                             const UserCountries& user_geo) {
  GraphBuilder builder(true);
  const auto in_country = [&](const std::string& user) {
    const auto it = user_geo.find(user);
    return it != user_geo.end() && it->second == country;
  };
  for (const auto& e : events) {
    if (!e.is_retweet() || e.lang != lang) continue;
    if (e.user_id == *e.retweeted_user_id) continue;
    if (!in_country(e.user_id) || !in_country(*e.retweeted_user_id)) continue;
    builder.add_edge(e.user_id, *e.retweeted_user_id, 1);
  }
  return std::move(builder).build();
}

WeightedGraph build_co_graph(std::span<const TweetEvent> events, const CountryCode& country, std::string_view lang,
                             const UserCountries& user_geo) {
  // url -> sharing users; std::set keeps both levels ordered for determinism.
  std::map<std::string, std::set<std::string>> sharers;
  for (const auto& e : events) {
    if (e.lang != lang || e.urls.empty()) continue;
    const auto it = user_geo.find(e.user_id);
    if (it == user_geo.end() || it->second != country) continue;
    for (const auto& url : e.urls) sharers[normalize_url(url)].insert(e.user_id);
  }
  GraphBuilder builder(false);
  for (const auto& [url, users] : sharers) {
    if (users.size() < 2) continue;
    const std::vector<std::string> list(users.begin(), users.end());
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = i + 1; j < list.size(); ++j) builder.add_edge(list[i], list[j], 1);
  }
  return std::move(builder).build();
}

WeightedGraph prune(const WeightedGraph& graph, std::int64_t min_weight_rt, std::int64_t min_weight_co) {
  if (min_weight_rt < 1 || min_weight_co < 1) throw InvalidArgument("pruning thresholds must be >= 1");
  const std::int64_t threshold = graph.directed() ? min_weight_rt : min_weight_co;
  GraphBuilder builder(graph.directed());
  for (const auto& e : graph.edges()) {
    if (e.weight >= threshold) builder.add_edge(graph.name(e.source), graph.name(e.target), e.weight);
  }
  return std::move(builder).build();
}

std::vector<std::uint32_t> connected_components(const WeightedGraph& graph) {
  DisjointSets sets(graph.node_count());
  for (const auto& e : graph.edges()) sets.unite(e.source, e.target);
  std::vector<std::uint32_t> label(graph.node_count());
  std::vector<std::uint32_t> root_label(graph.node_count(), UINT32_MAX);
  std::uint32_t next = 0;
  for (std::uint32_t i = 0; i < graph.node_count(); ++i) {
    const auto r = sets.find(i);
    if (root_label[r] == UINT32_MAX) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

WeightedGraph giant_component(const WeightedGraph& graph) {
  if (graph.empty()) return graph;
  const auto label = connected_components(graph);
  std::vector<std::size_t> size(*std::max_element(label.begin(), label.end()) + 1, 0);
  for (auto l : label) ++size[l];
  // Labels follow smallest node index, so the first maximum wins ties.
  const auto best = static_cast<std::uint32_t>(std::max_element(size.begin(), size.end()) - size.begin());
  std::vector<bool> keep(graph.node_count());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = label[i] == best;
  return graph.induced(keep);
}

double overlap_coefficient(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() || b.empty()) throw InvalidArgument("overlap coefficient of an empty set");
  std::size_t common = 0;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end() && ib != b.end();) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(std::min(a.size(), b.size()));
}

Eigen::SparseMatrix<double> adjacency_matrix(const WeightedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() * (graph.directed() ? 1 : 2));
  for (const auto& e : graph.edges()) {
    triplets.emplace_back(e.source, e.target, static_cast<double>(e.weight));
    if (!graph.directed()) triplets.emplace_back(e.target, e.source, static_cast<double>(e.weight));
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::SparseMatrix<double> symmetric_adjacency(const WeightedGraph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.node_count());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.edge_count() * 2);
  for (const auto& e : graph.edges()) {
    triplets.emplace_back(e.source, e.target, static_cast<double>(e.weight));
    triplets.emplace_back(e.target, e.source, static_cast<double>(e.weight));
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(triplets.begin(), triplets.end());  // duplicates add up
  return a;
}

void write_edge_list(std::ostream& out, const WeightedGraph& graph, std::string_view comment) {
  out << (graph.directed() ? "#directed" : "#undirected") << '\n';
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const auto& e : graph.edges())
    out << graph.name(e.source) << '\t' << graph.name(e.target) << '\t' << e.weight << '\n';
}

WeightedGraph read_edge_list(std::istream& in) {
  std::string line;
  std::optional<bool> directed;
  while (!directed && std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty()) continue;
    if (t == "#directed") directed = true;
    else if (t == "#undirected") directed = false;
    else throw FormatError("edge list must start with #directed or #undirected");
  }
  if (!directed) throw FormatError("edge list without header");
  GraphBuilder builder(*directed);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 3) throw FormatError("edge line must be u<TAB>v<TAB>weight: " + line);
    std::int64_t w = 0;
    try {
      w = std::stoll(std::string(parts[2]));
    } catch (const std::exception&) {
      throw FormatError("bad edge weight: " + line);
    }
    if (w <= 0) throw FormatError("edge weight must be positive: " + line);
    if (parts[0] == parts[1]) throw FormatError("self-loop in edge list: " + line);
    builder.add_edge(parts[0], parts[1], w);
  }
  if (in.bad()) throw IoError("read failure on edge list");
  return std::move(builder).build();
}

void save_graph(const std::filesystem::path& path, const WeightedGraph& graph, std::string_view comment) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_edge_list(out, graph, comment);
}

WeightedGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_edge_list(in);
}

}  // namespace polarnet
