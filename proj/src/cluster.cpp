#include "polarnet/cluster.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace polarnet {

std::size_t Partition::community_count() const {
  if (community.empty()) return 0;
  return *std::max_element(community.begin(), community.end()) + std::size_t{1};
}

std::vector<std::size_t> Partition::community_sizes() const {
  std::vector<std::size_t> sizes(community_count(), 0);
  for (auto c : community) ++sizes[c];
  return sizes;
}

std::optional<std::uint32_t> Partition::community_of(std::string_view node) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), node);
  if (it == nodes.end() || *it != node) return std::nullopt;
  return community[static_cast<std::size_t>(it - nodes.begin())];
}

Partition Partition::from_labels(std::vector<std::string> nodes, const std::vector<std::uint64_t>& labels) {
  if (nodes.size() != labels.size()) throw InvalidArgument("partition: nodes and labels differ in length");
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });

  Partition p;
  p.nodes.reserve(nodes.size());
  std::vector<std::uint64_t> sorted_labels;
  sorted_labels.reserve(nodes.size());
  for (auto i : order) {
    if (!p.nodes.empty() && p.nodes.back() == nodes[i]) throw InvalidArgument("partition: duplicate node " + nodes[i]);
    p.nodes.push_back(std::move(nodes[i]));
    sorted_labels.push_back(labels[i]);
  }

  struct Group {
    std::size_t size = 0;
    std::size_t first = 0;
  };
  std::map<std::uint64_t, Group> groups;
  for (std::size_t i = 0; i < sorted_labels.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(sorted_labels[i], Group{0, i});
    ++it->second.size;
  }
  std::vector<std::pair<std::uint64_t, Group>> ranked(groups.begin(), groups.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second.size != y.second.size) return x.second.size > y.second.size;
    return x.second.first < y.second.first;
  });
  std::unordered_map<std::uint64_t, std::uint32_t> renumber;
  for (std::size_t r = 0; r < ranked.size(); ++r) renumber[ranked[r].first] = static_cast<std::uint32_t>(r);
  p.community.reserve(sorted_labels.size());
  for (auto l : sorted_labels) p.community.push_back(renumber.at(l));
  return p;
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Cluster state indexed by slot. A merged cluster reuses the slot of the
// operand with the larger neighbor map, so only the smaller map is rewired.
struct ParisState {
  std::vector<double> degree;
  std::vector<std::unordered_map<std::uint32_t, double>> adjacency;
  std::vector<ClusterId> cluster_id;
  std::vector<std::uint32_t> size;
  std::vector<bool> active;
  double total = 0.0;

  double distance(std::uint32_t a, std::uint32_t b, double weight_ab) const {
    return degree[a] * degree[b] / (weight_ab * total);
  }

  std::uint32_t merge(std::uint32_t a, std::uint32_t b) {
    auto keep = a;
    auto gone = b;
    if (adjacency[gone].size() > adjacency[keep].size() ||
        (adjacency[gone].size() == adjacency[keep].size() && gone < keep))
      std::swap(keep, gone);
    auto& into = adjacency[keep];
    into.erase(gone);
    for (const auto& [x, w] : adjacency[gone]) {
      if (x == keep) continue;
      into[x] += w;
      auto& nx = adjacency[x];
      nx.erase(gone);
      nx[keep] += w;
    }
    adjacency[gone] = {};
    degree[keep] += degree[gone];
    size[keep] += size[gone];
    active[gone] = false;
    return keep;
  }
};

}  // namespace

Dendrogram paris_dendrogram(const WeightedGraph& graph) {
  const auto n = static_cast<std::uint32_t>(graph.node_count());
  Dendrogram dendrogram;
  dendrogram.leaves = graph.nodes();
  if (n <= 1) return dendrogram;

  const auto components = connected_components(graph);
  if (*std::max_element(components.begin(), components.end()) != 0)
    throw InvalidArgument("paris_dendrogram: graph is disconnected; take the giant component first");

  ParisState st;
  st.degree.assign(n, 0.0);
  st.adjacency.resize(n);
  st.cluster_id.resize(n);
  std::iota(st.cluster_id.begin(), st.cluster_id.end(), 0U);
  st.size.assign(n, 1);
  st.active.assign(n, true);
  for (const auto& e : graph.edges()) {
    const auto w = static_cast<double>(e.weight);
    st.adjacency[e.source][e.target] += w;
    st.adjacency[e.target][e.source] += w;
    st.degree[e.source] += w;
    st.degree[e.target] += w;
  }
  st.total = std::accumulate(st.degree.begin(), st.degree.end(), 0.0);

  std::vector<Merge> merges;
  merges.reserve(n - 1);
  std::vector<std::uint32_t> chain;
  std::uint32_t cursor = 0;
  std::uint32_t remaining = n;

  while (remaining > 1) {
    if (chain.empty()) {
      while (!st.active[cursor]) ++cursor;
      chain.push_back(cursor);
    }
    const auto a = chain.back();
    const auto prev = chain.size() >= 2 ? chain[chain.size() - 2] : kNone;

    // Nearest neighbor of a; the previous chain element wins ties so the
    // chain always terminates in a reciprocal pair.
    auto best = kNone;
    double best_d = std::numeric_limits<double>::infinity();
    if (prev != kNone) {
      best = prev;
      best_d = st.distance(a, prev, st.adjacency[a].at(prev));
    }
    for (const auto& [x, w] : st.adjacency[a]) {
      const double d = st.distance(a, x, w);
      if (d < best_d || (d == best_d && best != prev && x < best)) {
        best = x;
        best_d = d;
      }
    }

    if (best == prev) {
      chain.pop_back();
      chain.pop_back();
      const ClusterId id_a = st.cluster_id[a];
      const ClusterId id_b = st.cluster_id[prev];
      const auto slot = st.merge(a, prev);
      const ClusterId new_id = n + static_cast<ClusterId>(merges.size());
      st.cluster_id[slot] = new_id;
      merges.push_back({std::min(id_a, id_b), std::max(id_a, id_b), best_d, new_id, st.size[slot]});
      --remaining;
    } else {
      chain.push_back(best);
    }
  }

  // The chain emits merges out of height order; sort them (children before
  // parents) and renumber cluster ids accordingly.
  std::vector<double> effective(merges.size());
  for (std::size_t i = 0; i < merges.size(); ++i) {
    double h = merges[i].height;
    for (auto child : {merges[i].a, merges[i].b})
      if (child >= n) h = std::max(h, effective[child - n]);
    effective[i] = h;
  }
  std::vector<std::size_t> order(merges.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return effective[x] < effective[y]; });
  std::vector<ClusterId> renumber(merges.size());
  for (std::size_t j = 0; j < order.size(); ++j) renumber[order[j]] = n + static_cast<ClusterId>(j);
  const auto relabel = [&](ClusterId c) { return c < n ? c : renumber[c - n]; };
  dendrogram.merges.reserve(merges.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto& m = merges[order[j]];
    const auto a = relabel(m.a);
    const auto b = relabel(m.b);
    dendrogram.merges.push_back({std::min(a, b), std::max(a, b), effective[order[j]], n + static_cast<ClusterId>(j), m.size});
  }
  return dendrogram;
}

Partition cut_k(const Dendrogram& dendrogram, std::size_t k) {
  const auto n = dendrogram.leaf_count();
  if (k < 1 || k > n) throw InvalidArgument("cut_k: k must lie in [1, " + std::to_string(n) + "]");
  if (n - k > dendrogram.merges.size()) throw InvalidArgument("cut_k: dendrogram is incomplete for this k");
  const std::size_t applied = n - k;
  std::vector<ClusterId> parent(n + applied);
  std::iota(parent.begin(), parent.end(), 0U);
  for (std::size_t i = 0; i < applied; ++i) {
    const auto& m = dendrogram.merges[i];
    parent[m.a] = m.id;
    parent[m.b] = m.id;
  }
  std::vector<std::uint64_t> labels(n);
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    auto c = static_cast<ClusterId>(leaf);
    while (parent[c] != c) c = parent[c];
    labels[leaf] = c;
  }
  return Partition::from_labels(dendrogram.leaves, labels);
}

double modularity(const WeightedGraph& graph, const Partition& partition) {
  if (graph.edge_count() == 0) throw InvalidArgument("modularity of a graph without edges");
  std::vector<std::uint32_t> community(graph.node_count());
  const bool aligned = partition.nodes == graph.nodes();
  for (NodeIndex i = 0; i < graph.node_count(); ++i) {
    if (aligned) {
      community[i] = partition.community[i];
    } else {
      const auto c = partition.community_of(graph.name(i));
      if (!c) throw InvalidArgument("modularity: node " + graph.name(i) + " missing from partition");
      community[i] = *c;
    }
  }
  const std::size_t k = partition.community_count();
  std::vector<double> inside(k, 0.0);
  std::vector<double> strength(k, 0.0);
  double total = 0.0;
  for (const auto& e : graph.edges()) {
    const auto w = static_cast<double>(e.weight);
    total += w;
    strength[community[e.source]] += w;
    strength[community[e.target]] += w;
    if (community[e.source] == community[e.target]) inside[community[e.source]] += w;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double frac = strength[c] / (2.0 * total);
    q += inside[c] / total - frac * frac;
  }
  return q;
}

Selection select_partition(const WeightedGraph& graph, const Dendrogram& dendrogram, const SelectionOptions& options) {
  const auto n = dendrogram.leaf_count();
  if (n != graph.node_count()) throw InvalidArgument("select_partition: dendrogram does not match the graph");
  if (options.first_k < 2 || options.last_k < options.first_k || options.step < 1)
    throw InvalidArgument("select_partition: bad window options");
  Selection sel;
  if (n < 2) {
    sel.partition = cut_k(dendrogram, n == 0 ? 0 : 1);
    sel.k = n;
    return sel;
  }
  std::size_t lo = options.first_k;
  std::size_t hi = std::min(options.last_k, n);
  while (true) {
    bool have_best = false;
    for (std::size_t k = std::min(lo, n); k <= hi; ++k) {
      auto part = cut_k(dendrogram, k);
      const double q = modularity(graph, part);
      sel.evaluated.emplace_back(k, q);
      if (!have_best || q > sel.modularity) {
        sel.partition = std::move(part);
        sel.k = k;
        sel.modularity = q;
        have_best = true;
      }
    }
    const auto sizes = sel.partition.community_sizes();
    const auto largest = *std::max_element(sizes.begin(), sizes.end());
    if (static_cast<double>(largest) <= options.dominance * static_cast<double>(n) || hi >= n) return sel;
    lo = hi + 1;
    hi = std::min(hi + options.step, n);
  }
}

void save_dendrogram(const std::filesystem::path& path, const Dendrogram& dendrogram, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  for (const auto& m : dendrogram.merges) {
    out += std::to_string(m.a) + '\t' + std::to_string(m.b) + '\t' + format_real(m.height) + '\t' +
           std::to_string(m.id) + '\n';
  }
  write_file(path, out);
}

Dendrogram load_dendrogram(const std::filesystem::path& path, std::vector<std::string> leaves) {
  Dendrogram d;
  d.leaves = std::move(leaves);
  const auto n = static_cast<ClusterId>(d.leaves.size());
  std::vector<std::uint32_t> sizes(n, 1);
  std::vector<bool> used(n, false);
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 4) throw FormatError("dendrogram line must have 4 fields: " + line);
    Merge m;
    try {
      m.a = static_cast<ClusterId>(std::stoul(std::string(parts[0])));
      m.b = static_cast<ClusterId>(std::stoul(std::string(parts[1])));
      m.height = std::stod(std::string(parts[2]));
      m.id = static_cast<ClusterId>(std::stoul(std::string(parts[3])));
    } catch (const std::exception&) {
      throw FormatError("bad dendrogram line: " + line);
    }
    if (m.id != n + d.merges.size() || m.a >= m.id || m.b >= m.id || m.a == m.b || used[m.a] || used[m.b])
      throw FormatError("inconsistent dendrogram merge: " + line);
    used[m.a] = used[m.b] = true;
    m.size = sizes[m.a] + sizes[m.b];
    sizes.push_back(m.size);
    used.push_back(false);
    d.merges.push_back(m);
  }
  return d;
}

void save_partition(const std::filesystem::path& path, const Partition& partition, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  for (std::size_t i = 0; i < partition.nodes.size(); ++i)
    out += partition.nodes[i] + '\t' + std::to_string(partition.community[i]) + '\n';
  write_file(path, out);
}

Partition load_partition(const std::filesystem::path& path) {
  std::vector<std::string> nodes;
  std::vector<std::uint64_t> labels;
  for (const auto& line : read_data_lines(path)) {
    const auto parts = split(line, '\t');
    if (parts.size() != 2) throw FormatError("partition line must be user_id<TAB>community_id: " + line);
    nodes.emplace_back(parts[0]);
    try {
      labels.push_back(std::stoull(std::string(parts[1])));
    } catch (const std::exception&) {
      throw FormatError("bad community id: " + line);
    }
  }
  return Partition::from_labels(std::move(nodes), labels);
}

}  // namespace polarnet
