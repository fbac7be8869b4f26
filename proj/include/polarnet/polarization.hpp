#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polarnet/cluster.hpp"
#include "polarnet/graph.hpp"

namespace polarnet {

/// Two-sided split of a graph's nodes (side X flagged true).
struct Bipartition {
  std::vector<bool> in_x;

  /// Side X given by node ids; all other graph nodes form side Y.
  static Bipartition from_side_x(const WeightedGraph& graph, const std::vector<std::string>& side_x);
  /// Explicit sides, checked to be disjoint and to cover the graph.
  static Bipartition from_sides(const WeightedGraph& graph, const std::vector<std::string>& side_x,
                                const std::vector<std::string>& side_y);
};

enum class RwcMethod { exact, montecarlo };

struct RwcResult {
  double rwc = 0.0;
  double p_xx = 0.0;
  double p_xy = 0.0;
  double p_yx = 0.0;
  double p_yy = 0.0;
  RwcMethod method = RwcMethod::exact;
  std::optional<std::size_t> n_walks;
  std::optional<double> std_error;
  std::size_t absorbing_x = 0;
  std::size_t absorbing_y = 0;
};

/// Number of absorbing nodes per side.
struct AbsorbCounts {
  std::size_t x = 10;
  std::size_t y = 10;
};

/// max(10, ceil(2% of the side)).
std::size_t default_k_absorb(std::size_t side_size);
AbsorbCounts default_absorb_counts(const Bipartition& sides);

struct WalkOptions {
  bool reversed = false;  // walk against edge direction (retweeted -> retweeter)
  unsigned workers = 1;
};

/// Random Walk Controversy from the absorbing-chain linear system.
///
/// The top-k nodes of each side by weighted in-degree absorb walks. A walk
/// starts at a uniformly chosen non-absorbing node of its side, follows
/// out-edges with probability proportional to weight, and restarts from its
/// side's start distribution at dangling nodes. Undirected graphs are walked
/// in both directions.
RwcResult rwc_exact(const WeightedGraph& graph, const Bipartition& sides, AbsorbCounts k_absorb,
                    const WalkOptions& options = {});
inline RwcResult rwc_exact(const WeightedGraph& graph, const Bipartition& sides, std::size_t k_absorb,
                           const WalkOptions& options = {}) {
  return rwc_exact(graph, sides, AbsorbCounts{k_absorb, k_absorb}, options);
}

/// Same quantity estimated from `n_walks` simulated walks per side.
RwcResult rwc_montecarlo(const WeightedGraph& graph, const Bipartition& sides, AbsorbCounts k_absorb,
                         std::size_t n_walks, std::uint64_t seed, const WalkOptions& options = {});
inline RwcResult rwc_montecarlo(const WeightedGraph& graph, const Bipartition& sides, std::size_t k_absorb,
                                std::size_t n_walks, std::uint64_t seed, const WalkOptions& options = {}) {
  return rwc_montecarlo(graph, sides, AbsorbCounts{k_absorb, k_absorb}, n_walks, seed, options);
}

/// 2 I(A;B) / (H(A) + H(B)) over the nodes present in both partitions.
double nmi(const Partition& a, const Partition& b);

/// Same, on two label vectors of equal length.
double nmi_labels(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

}  // namespace polarnet
