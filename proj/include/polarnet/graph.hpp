#pragma once

#include <Eigen/SparseCore>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "polarnet/common.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet {

using NodeIndex = std::uint32_t;

struct Edge {
  NodeIndex source = 0;
  NodeIndex target = 0;
  std::int64_t weight = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Sparse weighted graph over user ids.
///
/// Nodes are kept sorted lexicographically so that node indices, edge order
/// and every export are deterministic. Undirected edges are stored once with
/// source < target. Weights are positive and there are no self-loops.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  bool directed() const { return directed_; }
  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  std::optional<NodeIndex> index_of(std::string_view id) const;
  const std::string& name(NodeIndex i) const { return nodes_[i]; }
  std::int64_t total_weight() const;

  /// Keeps the nodes flagged in `keep` and the edges between them.
  WeightedGraph induced(const std::vector<bool>& keep) const;

  bool operator==(const WeightedGraph&) const = default;

 private:
  friend class GraphBuilder;
  bool directed_ = false;
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
};

/// Accumulates weighted edges by user id; repeated edges add up.
class GraphBuilder {
 public:
  explicit GraphBuilder(bool directed) : directed_(directed) {}

  void add_node(std::string_view id);
  /// Self-loops are ignored; weight must be positive.
  void add_edge(std::string_view u, std::string_view v, std::int64_t weight = 1);

  WeightedGraph build() &&;

 private:
  std::uint32_t intern(std::string_view id);

  bool directed_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::unordered_map<std::uint64_t, std::int64_t> weights_;
};

/// Directed retweet graph: weight(i -> j) is how many times i retweeted j,
/// counting events in `lang` where both users are geolocated in `country`.
/// Nodes are the endpoints of qualifying retweets.
WeightedGraph build_rt_graph(std::span<const TweetEvent> events, const CountryCode& country, std::string_view lang,
                             const UserCountries& user_geo);

/// Undirected co-sharing graph: weight(i, j) is the number of distinct
/// normalized URLs shared by both users.
WeightedGraph build_co_graph(std::span<const TweetEvent> events, const CountryCode& country, std::string_view lang,
                             const UserCountries& user_geo);

/// Drops edges lighter than the threshold for the graph kind (directed: RT,
/// undirected: CO), then isolated nodes.
WeightedGraph prune(const WeightedGraph& graph, std::int64_t min_weight_rt = 1, std::int64_t min_weight_co = 2);

/// Largest weakly connected component; ties go to the component holding the
/// smallest node id.
WeightedGraph giant_component(const WeightedGraph& graph);

/// Component label per node (weak connectivity), labels numbered in order of
/// each component's smallest node index.
std::vector<std::uint32_t> connected_components(const WeightedGraph& graph);

/// |A ∩ B| / min(|A|, |B|). Throws InvalidArgument on an empty set.
double overlap_coefficient(std::vector<std::string> a, std::vector<std::string> b);

/// Row = source, column = target.
Eigen::SparseMatrix<double> adjacency_matrix(const WeightedGraph& graph);
/// Symmetric adjacency; directed graphs are symmetrized as w(i,j) + w(j,i).
Eigen::SparseMatrix<double> symmetric_adjacency(const WeightedGraph& graph);

/// "#directed" or "#undirected" header, then "u<TAB>v<TAB>weight" lines.
void write_edge_list(std::ostream& out, const WeightedGraph& graph, std::string_view comment = {});
WeightedGraph read_edge_list(std::istream& in);
void save_graph(const std::filesystem::path& path, const WeightedGraph& graph, std::string_view comment = {});
WeightedGraph load_graph(const std::filesystem::path& path);

}  // namespace polarnet
