#include "polarnet/polarization.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <map>
#include <numeric>
#include <random>

namespace polarnet {

Bipartition Bipartition::from_side_x(const WeightedGraph& graph, const std::vector<std::string>& side_x) {
  Bipartition b;
  b.in_x.assign(graph.node_count(), false);
  for (const auto& id : side_x) {
    const auto i = graph.index_of(id);
    if (!i) throw InvalidArgument("bipartition: node " + id + " is not in the graph");
    b.in_x[*i] = true;
  }
  return b;
}

Bipartition Bipartition::from_sides(const WeightedGraph& graph, const std::vector<std::string>& side_x,
                                    const std::vector<std::string>& side_y) {
  auto b = from_side_x(graph, side_x);
  std::vector<bool> seen_y(graph.node_count(), false);
  for (const auto& id : side_y) {
    const auto i = graph.index_of(id);
    if (!i) throw InvalidArgument("bipartition: node " + id + " is not in the graph");
    if (b.in_x[*i]) throw InvalidArgument("bipartition: node " + id + " is on both sides");
    seen_y[*i] = true;
  }
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    if (!b.in_x[i] && !seen_y[i]) throw InvalidArgument("bipartition: node " + graph.name(i) + " is on neither side");
  return b;
}

std::size_t default_k_absorb(std::size_t side_size) {
  const auto relative = static_cast<std::size_t>(std::ceil(0.02 * static_cast<double>(side_size)));
  return std::max<std::size_t>(10, relative);
}

AbsorbCounts default_absorb_counts(const Bipartition& sides) {
  const auto nx = static_cast<std::size_t>(std::count(sides.in_x.begin(), sides.in_x.end(), true));
  return {default_k_absorb(nx), default_k_absorb(sides.in_x.size() - nx)};
}

namespace {

enum Side : int { kX = 0, kY = 1 };
constexpr int kTransient = -1;

// Walk structure shared by the exact and Monte Carlo estimators.
struct WalkModel {
  std::size_t n = 0;
  std::vector<std::size_t> offset;    // CSR row starts, size n + 1
  std::vector<NodeIndex> target;
  std::vector<double> cumulative;     // per-row cumulative weights
  std::vector<int> absorbed_by;       // kX, kY or kTransient
  std::vector<NodeIndex> starts[2];   // start nodes per side
  std::size_t absorbing[2] = {0, 0};

  bool dangling(NodeIndex u) const { return offset[u] == offset[u + 1]; }
  double out_strength(NodeIndex u) const { return dangling(u) ? 0.0 : cumulative[offset[u + 1] - 1]; }
};

WalkModel make_model(const WeightedGraph& graph, const Bipartition& sides, AbsorbCounts k, bool reversed) {
  const auto n = graph.node_count();
  if (sides.in_x.size() != n) throw InvalidArgument("rwc: bipartition does not match the graph");
  if (k.x < 1 || k.y < 1) throw InvalidArgument("rwc: k_absorb must be at least 1");

  // (from, to, weight) in walk direction.
  std::vector<Edge> arcs;
  arcs.reserve(graph.edge_count() * (graph.directed() ? 1 : 2));
  for (const auto& e : graph.edges()) {
    if (!graph.directed()) {
      arcs.push_back({e.source, e.target, e.weight});
      arcs.push_back({e.target, e.source, e.weight});
    } else if (reversed) {
      arcs.push_back({e.target, e.source, e.weight});
    } else {
      arcs.push_back(e);
    }
  }
  std::sort(arcs.begin(), arcs.end());

  WalkModel m;
  m.n = n;
  m.offset.assign(n + 1, 0);
  std::vector<double> in_strength(n, 0.0);
  for (const auto& a : arcs) {
    ++m.offset[a.source + 1];
    in_strength[a.target] += static_cast<double>(a.weight);
  }
  std::partial_sum(m.offset.begin(), m.offset.end(), m.offset.begin());
  m.target.reserve(arcs.size());
  m.cumulative.reserve(arcs.size());
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const bool row_start = i == 0 || arcs[i - 1].source != arcs[i].source;
    const double prior = row_start ? 0.0 : m.cumulative.back();
    m.target.push_back(arcs[i].target);
    m.cumulative.push_back(prior + static_cast<double>(arcs[i].weight));
  }

  m.absorbed_by.assign(n, kTransient);
  for (int side : {kX, kY}) {
    std::vector<NodeIndex> members;
    for (NodeIndex u = 0; u < n; ++u)
      if (sides.in_x[u] == (side == kX)) members.push_back(u);
    if (members.empty()) throw InvalidArgument(std::string("rwc: side ") + (side == kX ? "X" : "Y") + " is empty");
    std::stable_sort(members.begin(), members.end(),
                     [&](NodeIndex a, NodeIndex b) { return in_strength[a] > in_strength[b]; });
    const auto count = std::min(side == kX ? k.x : k.y, members.size());
    for (std::size_t i = 0; i < count; ++i) m.absorbed_by[members[i]] = side;
    m.absorbing[side] = count;
    for (auto u : members)
      if (m.absorbed_by[u] == kTransient) m.starts[side].push_back(u);
    // A side made only of absorbers starts its walks on them.
    if (m.starts[side].empty()) m.starts[side] = members;
    std::sort(m.starts[side].begin(), m.starts[side].end());
  }
  return m;
}

struct Reachability {
  std::vector<bool> from_start;  // reachable from the start side
  std::vector<bool> reaches[2];  // can hit an absorber of side X / Y
};

// Graph searches on the walk chain of start side `side`, where dangling nodes
// lead back to the side's start nodes.
Reachability reachability(const WalkModel& m, int side) {
  const auto n = m.n;
  Reachability r;
  std::vector<bool> is_start(n, false);
  for (auto s : m.starts[side]) is_start[s] = true;
  std::vector<NodeIndex> dangling_transient;
  for (NodeIndex u = 0; u < n; ++u)
    if (m.absorbed_by[u] == kTransient && m.dangling(u)) dangling_transient.push_back(u);

  r.from_start.assign(n, false);
  std::deque<NodeIndex> queue;
  for (auto s : m.starts[side]) {
    r.from_start[s] = true;
    queue.push_back(s);
  }
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    if (m.absorbed_by[u] != kTransient) continue;
    for (auto i = m.offset[u]; i < m.offset[u + 1]; ++i) {
      const auto v = m.target[i];
      if (!r.from_start[v]) {
        r.from_start[v] = true;
        queue.push_back(v);
      }
    }
  }

  std::vector<std::vector<NodeIndex>> reverse(n);
  for (NodeIndex u = 0; u < n; ++u) {
    if (m.absorbed_by[u] != kTransient) continue;
    for (auto i = m.offset[u]; i < m.offset[u + 1]; ++i) reverse[m.target[i]].push_back(u);
  }
  for (int target_side : {kX, kY}) {
    auto& mark = r.reaches[target_side];
    mark.assign(n, false);
    bool restart_marked = false;
    for (NodeIndex u = 0; u < n; ++u) {
      if (m.absorbed_by[u] == target_side) {
        mark[u] = true;
        queue.push_back(u);
      }
    }
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      const auto visit = [&](NodeIndex u) {
        if (!mark[u]) {
          mark[u] = true;
          queue.push_back(u);
        }
      };
      for (auto u : reverse[v]) visit(u);
      if (is_start[v] && !restart_marked) {
        restart_marked = true;
        for (auto u : dangling_transient) visit(u);
      }
    }
  }
  return r;
}

void require_absorption(const WalkModel& m, const Reachability& r, int side) {
  for (NodeIndex u = 0; u < m.n; ++u) {
    if (r.from_start[u] && !r.reaches[kX][u] && !r.reaches[kY][u])
      throw Error(std::string("rwc: singular system, walks from side ") + (side == kX ? "X" : "Y") +
                  " can be trapped away from every absorbing node");
  }
}

// Probability that a walk from start side `side` is absorbed by side X.
double absorbed_in_x(const WalkModel& m, int side) {
  const auto r = reachability(m, side);
  require_absorption(m, r, side);

  // Known values: absorbers, and transient nodes that can reach one side only.
  std::vector<double> known(m.n, std::nan(""));
  std::vector<Eigen::Index> unknown_index(m.n, -1);
  Eigen::Index unknowns = 0;
  bool dangling_unknown = false;
  for (NodeIndex u = 0; u < m.n; ++u) {
    if (m.absorbed_by[u] == kX) known[u] = 1.0;
    else if (m.absorbed_by[u] == kY) known[u] = 0.0;
    else if (!r.reaches[kY][u]) known[u] = 1.0;
    else if (!r.reaches[kX][u]) known[u] = 0.0;
    else if (r.from_start[u]) {
      unknown_index[u] = unknowns++;
      if (m.dangling(u)) dangling_unknown = true;
    }
  }
  const auto& starts = m.starts[side];
  const double start_weight = 1.0 / static_cast<double>(starts.size());

  if (unknowns > 0) {
    const Eigen::Index restart = dangling_unknown ? unknowns : -1;
    const Eigen::Index dim = unknowns + (dangling_unknown ? 1 : 0);
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (NodeIndex u = 0; u < m.n; ++u) {
      const auto row = unknown_index[u];
      if (row < 0) continue;
      triplets.emplace_back(row, row, 1.0);
      if (m.dangling(u)) {
        triplets.emplace_back(row, restart, -1.0);
        continue;
      }
      const double total = m.out_strength(u);
      double previous = 0.0;
      for (auto i = m.offset[u]; i < m.offset[u + 1]; ++i) {
        const double p = (m.cumulative[i] - previous) / total;
        previous = m.cumulative[i];
        const auto v = m.target[i];
        if (unknown_index[v] >= 0) triplets.emplace_back(row, unknown_index[v], -p);
        else rhs[row] += p * known[v];
      }
    }
    if (restart >= 0) {
      triplets.emplace_back(restart, restart, 1.0);
      for (auto s : starts) {
        if (unknown_index[s] >= 0) triplets.emplace_back(restart, unknown_index[s], -start_weight);
        else rhs[restart] += start_weight * known[s];
      }
    }
    Eigen::SparseMatrix<double> system(dim, dim);
    system.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> solver;
    solver.compute(system);
    if (solver.info() != Eigen::Success) throw Error("rwc: singular absorbing-chain system");
    const Eigen::VectorXd h = solver.solve(rhs);
    if (solver.info() != Eigen::Success || !h.allFinite()) throw Error("rwc: absorbing-chain solve failed");
    for (NodeIndex u = 0; u < m.n; ++u)
      if (unknown_index[u] >= 0) known[u] = std::clamp(h[unknown_index[u]], 0.0, 1.0);
  }

  double sum = 0.0;
  for (auto s : starts) sum += known[s];
  return sum / static_cast<double>(starts.size());
}

RwcResult assemble(double p_xx, double p_yx) {
  RwcResult res;
  res.p_xx = p_xx;
  res.p_xy = 1.0 - p_xx;
  res.p_yx = p_yx;
  res.p_yy = 1.0 - p_yx;
  res.rwc = res.p_xx * res.p_yy - res.p_xy * res.p_yx;
  return res;
}

// Counts walks absorbed in X for one chunk of walks.
std::size_t run_walks(const WalkModel& m, int side, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& starts = m.starts[side];
  std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t hits_x = 0;
  for (std::size_t w = 0; w < count; ++w) {
    auto u = starts[pick_start(rng)];
    while (m.absorbed_by[u] == kTransient) {
      if (m.dangling(u)) {
        u = starts[pick_start(rng)];
        continue;
      }
      const auto begin = m.cumulative.begin() + static_cast<std::ptrdiff_t>(m.offset[u]);
      const auto end = m.cumulative.begin() + static_cast<std::ptrdiff_t>(m.offset[u + 1]);
      const double x = unit(rng) * *(end - 1);
      auto it = std::upper_bound(begin, end, x);
      if (it == end) --it;
      u = m.target[m.offset[u] + static_cast<std::size_t>(it - begin)];
    }
    if (m.absorbed_by[u] == kX) ++hits_x;
  }
  return hits_x;
}

}  // namespace

RwcResult rwc_exact(const WeightedGraph& graph, const Bipartition& sides, AbsorbCounts k_absorb,
                    const WalkOptions& options) {
  const auto m = make_model(graph, sides, k_absorb, options.reversed);
  auto res = assemble(absorbed_in_x(m, kX), absorbed_in_x(m, kY));
  res.method = RwcMethod::exact;
  res.absorbing_x = m.absorbing[kX];
  res.absorbing_y = m.absorbing[kY];
  return res;
}

RwcResult rwc_montecarlo(const WeightedGraph& graph, const Bipartition& sides, AbsorbCounts k_absorb,
                         std::size_t n_walks, std::uint64_t seed, const WalkOptions& options) {
  if (n_walks < 1) throw InvalidArgument("rwc_montecarlo: n_walks must be at least 1");
  const auto m = make_model(graph, sides, k_absorb, options.reversed);
  for (int side : {kX, kY}) require_absorption(m, reachability(m, side), side);

  constexpr std::size_t kChunk = 4096;
  double estimate[2] = {0.0, 0.0};
  for (int side : {kX, kY}) {
    const std::size_t chunks = (n_walks + kChunk - 1) / kChunk;
    std::vector<std::size_t> hits(chunks, 0);
    const auto chunk_job = [&](std::size_t c) {
      const std::size_t count = std::min(kChunk, n_walks - c * kChunk);
      const auto chunk_seed = mix_seed(seed, (static_cast<std::uint64_t>(side) << 40) + c);
      hits[c] = run_walks(m, side, count, chunk_seed);
    };
    const unsigned workers = std::max(1U, options.workers);
    if (workers == 1) {
      for (std::size_t c = 0; c < chunks; ++c) chunk_job(c);
    } else {
      std::vector<std::future<void>> jobs;
      for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
          for (std::size_t c = w; c < chunks; c += workers) chunk_job(c);
        }));
      }
      for (auto& j : jobs) j.get();
    }
    const auto total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    estimate[side] = static_cast<double>(total) / static_cast<double>(n_walks);
  }

  auto res = assemble(estimate[kX], estimate[kY]);
  res.method = RwcMethod::montecarlo;
  res.n_walks = n_walks;
  const double nw = static_cast<double>(n_walks);
  const double var = res.p_xx * res.p_xy / nw + res.p_yx * res.p_yy / nw;
  res.std_error = std::sqrt(var);
  res.absorbing_x = m.absorbing[kX];
  res.absorbing_y = m.absorbing[kY];
  return res;
}

namespace {

// Sums after sorting so the result does not depend on label order.
double stable_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

double entropy(const std::map<std::uint32_t, std::size_t>& counts, double total) {
  std::vector<double> terms;
  for (const auto& [_, c] : counts) {
    const double p = static_cast<double>(c) / total;
    terms.push_back(p * std::log(total / static_cast<double>(c)));
  }
  return stable_sum(std::move(terms));
}

}  // namespace

double nmi_labels(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.size() != b.size()) throw InvalidArgument("nmi: label vectors differ in length");
  if (a.empty()) throw InvalidArgument("nmi: no common items");
  const auto total = static_cast<double>(a.size());
  std::map<std::uint32_t, std::size_t> ca;
  std::map<std::uint32_t, std::size_t> cb;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++joint[{a[i], b[i]}];
  }
  const double ha = entropy(ca, total);
  const double hb = entropy(cb, total);
  if (ca.size() == 1 && cb.size() == 1) return 1.0;
  if (ca.size() == 1 || cb.size() == 1) return 0.0;
  std::vector<double> terms;
  terms.reserve(joint.size());
  for (const auto& [key, c] : joint) {
    const double n = static_cast<double>(c);
    const double margins = static_cast<double>(ca[key.first]) * static_cast<double>(cb[key.second]);
    terms.push_back(n / total * std::log(total * n / margins));
  }
  const double mi = stable_sum(std::move(terms));
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

double nmi(const Partition& a, const Partition& b) {
  std::vector<std::uint32_t> la;
  std::vector<std::uint32_t> lb;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.nodes.size() && j < b.nodes.size()) {
    if (a.nodes[i] < b.nodes[j]) {
      ++i;
    } else if (b.nodes[j] < a.nodes[i]) {
      ++j;
    } else {
      la.push_back(a.community[i++]);
      lb.push_back(b.community[j++]);
    }
  }
  if (la.empty()) throw InvalidArgument("nmi: partitions share no nodes");
  return nmi_labels(la, lb);
}

}  // namespace polarnet
