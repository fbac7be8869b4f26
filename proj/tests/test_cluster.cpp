#include <doctest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "polarnet/cluster.hpp"
#include "polarnet/polarization.hpp"
#include "polarnet/synth.hpp"

using namespace polarnet;
using fixtures::graph;

namespace {

std::vector<std::uint32_t> labels_by_name(const Partition& p, const std::vector<std::string>& order) {
  std::vector<std::uint32_t> out;
  for (const auto& n : order) out.push_back(*p.community_of(n));
  return out;
}

WeightedGraph clique_pair(std::size_t size) {
  std::vector<fixtures::WEdge> edges;
  for (const char side : {'a', 'b'})
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = i + 1; j < size; ++j)
        edges.push_back({std::string(1, side) + std::to_string(i), std::string(1, side) + std::to_string(j)});
  edges.push_back({"a0", "b0"});
  return graph(false, edges);
}

}  // namespace

TEST_CASE("two triangles merge internally before the bridge") {
  const auto d = paris_dendrogram(fixtures::two_triangles());
  REQUIRE(d.merges.size() == 5);
  for (std::size_t i = 0; i < 4; ++i) CHECK(d.merges[i].size <= 3);
  CHECK(d.merges[4].size == 6);
  for (std::size_t i = 1; i < d.merges.size(); ++i) CHECK(d.merges[i - 1].height <= d.merges[i].height);
  const auto p = cut_k(d, 2);
  CHECK(labels_by_name(p, {"a", "b", "c", "d", "e", "f"}) == std::vector<std::uint32_t>{0, 0, 0, 1, 1, 1});
}

TEST_CASE("small dendrograms") {
  const auto single = paris_dendrogram(graph(false, {{"x", "y", 4}}));
  REQUIRE(single.merges.size() == 1);
  CHECK(single.merges[0].size == 2);
  CHECK(single.merges[0].id == 2);
  const auto star = paris_dendrogram(graph(false, {{"h", "l1"}, {"h", "l2"}, {"h", "l3"}}));
  CHECK(star.merges.size() == 3);
  CHECK(star.merges.back().size == 4);
  CHECK_THROWS_AS(paris_dendrogram(graph(false, {{"a", "b"}, {"c", "d"}})), InvalidArgument);
}

TEST_CASE("cut_k extremes and refinement") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = fixtures::random_connected(rng, 15 + trial, 0.15);
    const auto d = paris_dendrogram(g);
    const auto n = g.node_count();
    CHECK(cut_k(d, 1).community_count() == 1);
    CHECK(cut_k(d, n).community_count() == n);
    CHECK_THROWS_AS(cut_k(d, n + 1), InvalidArgument);
    for (std::size_t k = 1; k < n; ++k) {
      const auto coarse = cut_k(d, k), fine = cut_k(d, k + 1);
      CHECK(fine.community_count() == k + 1);
      // Every fine community sits inside one coarse community.
      std::map<std::uint32_t, std::uint32_t> parent;
      for (std::size_t i = 0; i < n; ++i) {
        const auto [it, fresh] = parent.emplace(fine.community[i], coarse.community[i]);
        CHECK(it->second == coarse.community[i]);
      }
    }
  }
}

TEST_CASE("dendrogram structure is invariant to weight scaling") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const auto g = fixtures::random_connected(rng, 20, 0.2);
    GraphBuilder b(false);
    for (const auto& e : g.edges()) b.add_edge(g.name(e.source), g.name(e.target), 7 * e.weight);
    const auto d1 = paris_dendrogram(g);
    const auto d2 = paris_dendrogram(std::move(b).build());
    REQUIRE(d1.merges.size() == d2.merges.size());
    for (std::size_t i = 0; i < d1.merges.size(); ++i) {
      CHECK(d1.merges[i].a == d2.merges[i].a);
      CHECK(d1.merges[i].b == d2.merges[i].b);
      CHECK(d1.merges[i].height == doctest::Approx(d2.merges[i].height).epsilon(1e-9));
    }
  }
}

TEST_CASE("modularity examples") {
  const auto g = fixtures::two_triangles();
  CHECK(modularity(g, cut_k(paris_dendrogram(g), 1)) == doctest::Approx(0.0).epsilon(1e-15));
  const auto tri = Partition::from_labels(g.nodes(), {0, 0, 0, 1, 1, 1});
  CHECK(modularity(g, tri) == doctest::Approx(2.0 * (3.0 / 7.0 - 0.25)).epsilon(1e-12));
  CHECK(std::abs(modularity(g, tri) - 0.357143) < 1e-6);
  CHECK(modularity(g, cut_k(paris_dendrogram(g), g.node_count())) < 0.0);
}

TEST_CASE("modularity matches the brute-force double sum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = fixtures::random_connected(rng, 3 + rng() % 18, 0.25);
    std::vector<std::uint64_t> labels;
    const auto classes = 1 + rng() % 4;
    for (std::size_t i = 0; i < g.node_count(); ++i) labels.push_back(rng() % classes);
    const auto p = Partition::from_labels(g.nodes(), labels);
    CHECK(std::abs(modularity(g, p) - fixtures::brute_modularity(g, p)) <= 1e-12);
  }
}

TEST_CASE("select_partition picks the natural split") {
  const auto g = clique_pair(6);
  const auto s = select_partition(g, paris_dendrogram(g));
  CHECK(s.k == 2);
  CHECK(s.partition.community_sizes() == std::vector<std::size_t>{6, 6});
  CHECK(s.modularity == doctest::Approx(modularity(g, s.partition)).epsilon(1e-12));
}

TEST_CASE("select_partition on a planted three-block graph") {
  SbmSpec spec{{40, 40, 40}, 0.3, 0.005, 1.0, 7};
  const auto g = giant_component(sbm_generate(spec));
  const auto d = paris_dendrogram(g);
  const auto s = select_partition(g, d);
  // Brute-force check over the first window.
  std::size_t best_k = 0;
  double best_q = -1.0;
  for (std::size_t k = 2; k <= 5; ++k) {
    const auto q = fixtures::brute_modularity(g, cut_k(d, k));
    if (q > best_q + 1e-12) best_q = q, best_k = k;
  }
  CHECK(s.k == best_k);
  CHECK(s.k == 3);
  CHECK(nmi(s.partition, sbm_truth(spec)) > 0.95);
}

TEST_CASE("select_partition escalates past k=5 when one community dominates") {
  // A 200-clique with twenty pendant triangles: any cut with k <= 5 leaves
  // over 90% of the 260 nodes together.
  std::vector<fixtures::WEdge> edges;
  for (int i = 0; i < 200; ++i)
    for (int j = i + 1; j < 200; ++j) edges.push_back({"c" + std::to_string(i), "c" + std::to_string(j)});
  for (int t = 0; t < 20; ++t) {
    const auto p = "t" + std::to_string(t) + "_";
    edges.push_back({p + "0", p + "1"});
    edges.push_back({p + "1", p + "2"});
    edges.push_back({p + "0", p + "2"});
    edges.push_back({p + "0", "c" + std::to_string(t * 10)});
  }
  const auto g = graph(false, edges);
  const auto s = select_partition(g, paris_dendrogram(g));
  CHECK(s.k > 5);
  CHECK(s.evaluated.size() > 4);
  const auto sizes = s.partition.community_sizes();
  CHECK(static_cast<double>(sizes.front()) <= 0.9 * static_cast<double>(g.node_count()));
}

TEST_CASE("selection guarantee on random graphs") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = fixtures::random_connected(rng, 10 + rng() % 40, 0.05 + 0.1 * (trial % 3));
    const auto s = select_partition(g, paris_dendrogram(g));
    CHECK(s.partition.community_count() >= 2);
    const auto largest = static_cast<double>(s.partition.community_sizes().front());
    CHECK((largest <= 0.9 * static_cast<double>(g.node_count()) || s.k == g.node_count()));
  }
}

TEST_CASE("partition canonical numbering and files") {
  const auto p = Partition::from_labels({"d", "a", "c", "b"}, {9, 5, 9, 5});
  CHECK(p.nodes == std::vector<std::string>{"a", "b", "c", "d"});
  CHECK(p.community == std::vector<std::uint32_t>{0, 0, 1, 1});
  const auto dir = std::filesystem::temp_directory_path() / "polarnet_cluster_test";
  save_partition(dir / "p.tsv", p, "# c");
  const auto back = load_partition(dir / "p.tsv");
  CHECK(back.nodes == p.nodes);
  CHECK(back.community == p.community);
  const auto g = fixtures::two_triangles();
  const auto d = paris_dendrogram(g);
  save_dendrogram(dir / "d.tsv", d);
  const auto d2 = load_dendrogram(dir / "d.tsv", g.nodes());
  REQUIRE(d2.merges.size() == d.merges.size());
  CHECK(cut_k(d2, 2).community == cut_k(d, 2).community);
  std::filesystem::remove_all(dir);
}
