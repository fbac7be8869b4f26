#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "polarnet/graph.hpp"

namespace polarnet {

using ClusterId = std::uint32_t;

/// One agglomeration step. Leaves are 0..n-1; merge i creates cluster n+i.
struct Merge {
  ClusterId a = 0;
  ClusterId b = 0;
  double height = 0.0;
  ClusterId id = 0;
  std::uint32_t size = 0;  // leaves under the new cluster
};

/// Full merge tree, merges in non-decreasing height order.
struct Dendrogram {
  std::vector<std::string> leaves;
  std::vector<Merge> merges;

  std::size_t leaf_count() const { return leaves.size(); }
};

/// Assignment of every node to one community. Nodes are sorted; community
/// ids are dense, numbered by decreasing size (ties: smallest member first).
struct Partition {
  std::vector<std::string> nodes;
  std::vector<std::uint32_t> community;

  std::size_t size() const { return nodes.size(); }
  std::size_t community_count() const;
  std::vector<std::size_t> community_sizes() const;
  std::optional<std::uint32_t> community_of(std::string_view node) const;

  /// Builds a partition from arbitrary labels, renumbering them canonically.
  static Partition from_labels(std::vector<std::string> nodes, const std::vector<std::uint64_t>& labels);
};

/// Paris agglomerative clustering: repeatedly merges the pair of clusters
/// with the smallest node-pair sampling distance
///   d(a, b) = p(a) p(b) / p(a, b)
/// found with a nearest-neighbor chain. Directed graphs are symmetrized by
/// summing both directions. Throws InvalidArgument if the graph is not
/// connected.
Dendrogram paris_dendrogram(const WeightedGraph& graph);

/// Undoes the k-1 highest merges, leaving exactly k communities.
Partition cut_k(const Dendrogram& dendrogram, std::size_t k);

/// Newman weighted modularity on the symmetrized graph.
double modularity(const WeightedGraph& graph, const Partition& partition);

struct SelectionOptions {
  double dominance = 0.9;
  std::size_t first_k = 2;
  std::size_t last_k = 5;
  std::size_t step = 5;  // width of each later window
};

struct Selection {
  Partition partition;
  std::size_t k = 1;
  double modularity = 0.0;
  std::vector<std::pair<std::size_t, double>> evaluated;  // (k, Q) in evaluation order
};

/// Scans k in {2..5}, keeps the modularity maximum (smaller k on ties) and,
/// while its largest community holds more than `dominance` of the nodes,
/// moves on to the next window of k values.
Selection select_partition(const WeightedGraph& graph, const Dendrogram& dendrogram, const SelectionOptions& options = {});

/// "child_a<TAB>child_b<TAB>height<TAB>new_id"; leaf ids index the graph's sorted nodes.
void save_dendrogram(const std::filesystem::path& path, const Dendrogram& dendrogram, std::string_view comment = {});
Dendrogram load_dendrogram(const std::filesystem::path& path, std::vector<std::string> leaves);

/// "user_id<TAB>community_id".
void save_partition(const std::filesystem::path& path, const Partition& partition, std::string_view comment = {});
Partition load_partition(const std::filesystem::path& path);

}  // namespace polarnet
