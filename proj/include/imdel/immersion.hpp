#pragma once

#include <algorithm>
#include <climits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "imdel/canon.hpp"
#include "imdel/errors.hpp"
#include "imdel/flow.hpp"
#include "imdel/multigraph.hpp"

namespace imdel {

struct ImmersionModel {
  std::map<VertexId, VertexId> vertex_map;
  std::map<EdgeId, std::vector<EdgeId>> edge_map;

  EdgeSet used_edges() const {
    std::vector<EdgeId> out;
    for (const auto& [e, p] : edge_map) out.insert(out.end(), p.begin(), p.end());
    return EdgeSet(std::move(out));
  }
};

struct SearchLimits {
  long node_budget = 50'000'000;
};

// Statistics of the last searches, reset by the caller as desired.
struct SearchStats {
  long nodes = 0;
};

namespace detail {

// Backtracking immersion search on position-indexed graphs.
class ImmersionSearch {
 public:
  ImmersionSearch(const Dense& h, const Dense& g, std::vector<char> alive, std::vector<int> pinned, long budget)
      : h_(h), g_(g), alive_(std::move(alive)), pinned_(std::move(pinned)), budget_(budget) {
    if (alive_.empty()) alive_.assign(static_cast<std::size_t>(g.m()), 1);
    if (pinned_.empty()) pinned_.assign(static_cast<std::size_t>(h.n), -1);
  }

  // Returns vertex images and per-pattern-edge paths (edge positions of g).
  std::optional<std::pair<std::vector<int>, std::vector<std::vector<int>>>> run() {
    if (h_.n == 0) return std::make_pair(std::vector<int>{}, std::vector<std::vector<int>>{});
    if (h_.n > g_.n) return std::nullopt;
    gdeg_.assign(static_cast<std::size_t>(g_.n), 0);
    int alive_edges = 0;
    for (int e = 0; e < g_.m(); ++e)
      if (alive_[static_cast<std::size_t>(e)]) {
        ++alive_edges;
        ++gdeg_[static_cast<std::size_t>(g_.ends[static_cast<std::size_t>(e)][0])];
        ++gdeg_[static_cast<std::size_t>(g_.ends[static_cast<std::size_t>(e)][1])];
      }
    if (h_.m() > alive_edges) return std::nullopt;
    if (!feasible_cycles()) return std::nullopt;
    // Injectivity of the pins themselves.
    {
      std::vector<int> p;
      for (int x : pinned_)
        if (x >= 0) p.push_back(x);
      std::sort(p.begin(), p.end());
      if (std::adjacent_find(p.begin(), p.end()) != p.end()) return std::nullopt;
    }
    order_vertices();
    hl_ = gomory_hu(h_).lambda;
    lambda_cap_ = 0;
    for (int a = 0; a < h_.n; ++a)
      for (int b = a + 1; b < h_.n; ++b) lambda_cap_ = std::max(lambda_cap_, hl_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
    // Host connectivities are computed on demand, capped at what the pattern needs.
    if (lambda_cap_ >= 2) gl_.assign(static_cast<std::size_t>(g_.n), std::vector<int>(static_cast<std::size_t>(g_.n), -1));
    img_.assign(static_cast<std::size_t>(h_.n), -1);
    used_g_.assign(static_cast<std::size_t>(g_.n), 0);
    used_e_.assign(static_cast<std::size_t>(g_.m()), 0);
    free_deg_ = gdeg_;
    unrouted_.assign(static_cast<std::size_t>(h_.n), 0);
    for (int a = 0; a < h_.n; ++a) unrouted_[static_cast<std::size_t>(a)] = h_.degree(a);
    paths_.assign(static_cast<std::size_t>(h_.m()), {});
    if (!place(0)) return std::nullopt;
    return std::make_pair(img_, paths_);
  }

  long nodes() const { return nodes_; }

 private:
  bool feasible_cycles() const {
    // A pattern with a cycle needs a cycle among the live edges.
    auto cyclic = [](const Dense& d, const std::vector<char>* alive) {
      std::vector<int> par(static_cast<std::size_t>(d.n));
      for (int i = 0; i < d.n; ++i) par[static_cast<std::size_t>(i)] = i;
      auto find = [&](int x) {
        while (par[static_cast<std::size_t>(x)] != x) x = par[static_cast<std::size_t>(x)] = par[static_cast<std::size_t>(par[static_cast<std::size_t>(x)])];
        return x;
      };
      for (int e = 0; e < d.m(); ++e) {
        if (alive && !(*alive)[static_cast<std::size_t>(e)]) continue;
        int a = find(d.ends[static_cast<std::size_t>(e)][0]), b = find(d.ends[static_cast<std::size_t>(e)][1]);
        if (a == b) return true;
        par[static_cast<std::size_t>(a)] = b;
      }
      return false;
    };
    return !cyclic(h_, nullptr) || cyclic(g_, &alive_);
  }

  void order_vertices() {
    std::vector<char> done(static_cast<std::size_t>(h_.n), 0);
    std::vector<int> links(static_cast<std::size_t>(h_.n), 0);
    auto take = [&](int a) {
      done[static_cast<std::size_t>(a)] = 1;
      order_.push_back(a);
      for (auto [b, e] : h_.adj[static_cast<std::size_t>(a)]) ++links[static_cast<std::size_t>(b)];
    };
    for (int a = 0; a < h_.n; ++a)
      if (pinned_[static_cast<std::size_t>(a)] >= 0) take(a);
    while (static_cast<int>(order_.size()) < h_.n) {
      int best = -1;
      for (int a = 0; a < h_.n; ++a) {
        if (done[static_cast<std::size_t>(a)]) continue;
        if (best < 0 || std::make_pair(links[static_cast<std::size_t>(a)], h_.degree(a)) >
                            std::make_pair(links[static_cast<std::size_t>(best)], h_.degree(best)))
          best = a;
      }
      take(best);
    }
    pos_in_order_.assign(static_cast<std::size_t>(h_.n), 0);
    for (int i = 0; i < h_.n; ++i) pos_in_order_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])] = i;
    // Edges routed when their later endpoint is placed, grouped by parallel class.
    routes_.assign(static_cast<std::size_t>(h_.n), {});
    for (int e = 0; e < h_.m(); ++e) {
      int a = h_.ends[static_cast<std::size_t>(e)][0], b = h_.ends[static_cast<std::size_t>(e)][1];
      int later = pos_in_order_[static_cast<std::size_t>(a)] > pos_in_order_[static_cast<std::size_t>(b)] ? a : b;
      routes_[static_cast<std::size_t>(later)].push_back(e);
    }
    for (auto& r : routes_)
      std::sort(r.begin(), r.end(), [&](int x, int y) {
        auto key = [&](int e) {
          int a = h_.ends[static_cast<std::size_t>(e)][0], b = h_.ends[static_cast<std::size_t>(e)][1];
          return std::make_tuple(std::min(a, b), std::max(a, b), e);
        };
        return key(x) < key(y);
      });
  }

  void tick() {
    if (++nodes_ > budget_) throw ResourceError("immersion search exceeded node budget of " + std::to_string(budget_));
  }

  bool place(int i) {
    if (i == h_.n) return true;
    int a = order_[static_cast<std::size_t>(i)];
    int pin = pinned_[static_cast<std::size_t>(a)];
    for (int x = 0; x < g_.n; ++x) {
      if (pin >= 0 && x != pin) continue;
      if (used_g_[static_cast<std::size_t>(x)]) continue;
      if (gdeg_[static_cast<std::size_t>(x)] < h_.degree(a)) continue;
      if (!lambda_ok(a, x)) continue;
      tick();
      img_[static_cast<std::size_t>(a)] = x;
      used_g_[static_cast<std::size_t>(x)] = 1;
      if (route(i, 0)) return true;
      used_g_[static_cast<std::size_t>(x)] = 0;
      img_[static_cast<std::size_t>(a)] = -1;
    }
    return false;
  }

  bool lambda_ok(int a, int x) const {
    if (gl_.empty()) return true;
    for (int b = 0; b < h_.n; ++b) {
      int y = img_[static_cast<std::size_t>(b)];
      if (y < 0) continue;
      if (host_lambda(x, y) < hl_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]) return false;
    }
    return true;
  }

  int host_lambda(int x, int y) const {
    int& v = gl_[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
    if (v < 0) {
      std::vector<char> src(static_cast<std::size_t>(g_.n), 0), snk(static_cast<std::size_t>(g_.n), 0);
      src[static_cast<std::size_t>(x)] = 1;
      snk[static_cast<std::size_t>(y)] = 1;
      v = UnitFlow(g_, alive_).run(src, snk, lambda_cap_).value;
      gl_[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = v;
    }
    return v;
  }

  bool degrees_ok() const {
    for (int a = 0; a < h_.n; ++a) {
      int x = img_[static_cast<std::size_t>(a)];
      if (x >= 0 && free_deg_[static_cast<std::size_t>(x)] < unrouted_[static_cast<std::size_t>(a)]) return false;
    }
    return true;
  }

  bool last_route(int i, int j) const {
    if (i != h_.n - 1) return false;
    const auto& r = routes_[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])];
    // All remaining edges of this final step join the same pair.
    for (std::size_t t = static_cast<std::size_t>(j) + 1; t < r.size(); ++t)
      if (!same_pair(r[t], r[static_cast<std::size_t>(j)])) return false;
    return true;
  }

  bool same_pair(int e, int f) const {
    auto a = h_.ends[static_cast<std::size_t>(e)], b = h_.ends[static_cast<std::size_t>(f)];
    return (a[0] == b[0] && a[1] == b[1]) || (a[0] == b[1] && a[1] == b[0]);
  }

  std::vector<char> live_mask() const {
    std::vector<char> m(static_cast<std::size_t>(g_.m()));
    for (int e = 0; e < g_.m(); ++e) m[static_cast<std::size_t>(e)] = alive_[static_cast<std::size_t>(e)] && !used_e_[static_cast<std::size_t>(e)];
    return m;
  }

  void use_path(int e, const std::vector<int>& path, int delta) {
    for (int pe : path) {
      used_e_[static_cast<std::size_t>(pe)] = delta > 0;
      free_deg_[static_cast<std::size_t>(g_.ends[static_cast<std::size_t>(pe)][0])] -= delta;
      free_deg_[static_cast<std::size_t>(g_.ends[static_cast<std::size_t>(pe)][1])] -= delta;
    }
    unrouted_[static_cast<std::size_t>(h_.ends[static_cast<std::size_t>(e)][0])] -= delta;
    unrouted_[static_cast<std::size_t>(h_.ends[static_cast<std::size_t>(e)][1])] -= delta;
  }

  // Routes edge j of the routing list of order position i, then continues.
  bool route(int i, int j) {
    int a = order_[static_cast<std::size_t>(i)];
    const auto& r = routes_[static_cast<std::size_t>(a)];
    if (j == static_cast<int>(r.size())) {
      if (!degrees_ok()) return false;
      return place(i + 1);
    }
    int e = r[static_cast<std::size_t>(j)];
    // Parallel copies share an orientation so the symmetry break is sound.
    int ha = h_.ends[static_cast<std::size_t>(e)][0], hb = h_.ends[static_cast<std::size_t>(e)][1];
    int s = img_[static_cast<std::size_t>(std::min(ha, hb))];
    int t = img_[static_cast<std::size_t>(std::max(ha, hb))];
    // Size of the parallel group starting here.
    int k = 1;
    while (j + k < static_cast<int>(r.size()) && same_pair(r[static_cast<std::size_t>(j + k)], e)) ++k;
    bool group_start = j == 0 || !same_pair(r[static_cast<std::size_t>(j - 1)], e);
    if (group_start) {
      tick();
      Dense const& d = g_;
      std::vector<char> src(static_cast<std::size_t>(d.n), 0), snk(static_cast<std::size_t>(d.n), 0);
      src[static_cast<std::size_t>(s)] = 1;
      snk[static_cast<std::size_t>(t)] = 1;
      UnitFlow uf(d, live_mask());
      FlowResult fr = uf.run(src, snk, k);
      if (fr.value < k) return false;
      if (last_route(i, j)) {
        auto ps = uf.paths(fr, src, snk);
        for (int q = 0; q < k; ++q) {
          paths_[static_cast<std::size_t>(r[static_cast<std::size_t>(j + q)])] = ps[static_cast<std::size_t>(q)];
          use_path(r[static_cast<std::size_t>(j + q)], ps[static_cast<std::size_t>(q)], +1);
        }
        if (degrees_ok()) return true;
        for (int q = 0; q < k; ++q) use_path(r[static_cast<std::size_t>(j + q)], ps[static_cast<std::size_t>(q)], -1);
        return false;
      }
    }
    // Parallel copies take paths with strictly increasing first edges.
    int min_first = -1;
    if (!group_start) min_first = paths_[static_cast<std::size_t>(r[static_cast<std::size_t>(j - 1)])].front();
    std::vector<int> path;
    std::vector<char> on(static_cast<std::size_t>(g_.n), 0);
    on[static_cast<std::size_t>(s)] = 1;
    return dfs(i, j, e, s, t, min_first, path, on);
  }

  bool dfs(int i, int j, int e, int x, int t, int min_first, std::vector<int>& path, std::vector<char>& on) {
    if (x == t) {
      tick();
      paths_[static_cast<std::size_t>(e)] = path;
      use_path(e, path, +1);
      if (degrees_ok() && route(i, j + 1)) return true;
      use_path(e, path, -1);
      paths_[static_cast<std::size_t>(e)].clear();
      return false;
    }
    for (auto [y, pe] : g_.adj[static_cast<std::size_t>(x)]) {
      if (!alive_[static_cast<std::size_t>(pe)] || used_e_[static_cast<std::size_t>(pe)] || on[static_cast<std::size_t>(y)]) continue;
      if (path.empty() && pe <= min_first) continue;
      tick();
      on[static_cast<std::size_t>(y)] = 1;
      path.push_back(pe);
      used_e_[static_cast<std::size_t>(pe)] = 1;
      bool ok = dfs(i, j, e, y, t, min_first, path, on);
      used_e_[static_cast<std::size_t>(pe)] = 0;
      path.pop_back();
      on[static_cast<std::size_t>(y)] = 0;
      if (ok) {
        // Keep the edges of the successful branch marked.
        return true;
      }
    }
    return false;
  }

  const Dense& h_;
  const Dense& g_;
  std::vector<char> alive_;
  std::vector<int> pinned_;
  long budget_;
  long nodes_ = 0;
  std::vector<int> gdeg_, free_deg_, unrouted_;
  std::vector<std::vector<int>> hl_;
  mutable std::vector<std::vector<int>> gl_;
  int lambda_cap_ = 0;
  std::vector<int> order_, pos_in_order_;
  std::vector<std::vector<int>> routes_;
  std::vector<int> img_;
  std::vector<char> used_g_, used_e_;
  std::vector<std::vector<int>> paths_;
};

inline ImmersionModel to_model(const Multigraph& h, const Multigraph& g, const std::vector<int>& img,
                               const std::vector<std::vector<int>>& paths) {
  ImmersionModel m;
  for (int a = 0; a < static_cast<int>(h.order()); ++a) m.vertex_map[h.vertex_at(a)] = g.vertex_at(img[static_cast<std::size_t>(a)]);
  for (int e = 0; e < static_cast<int>(h.size()); ++e) {
    std::vector<EdgeId> p;
    for (int pe : paths[static_cast<std::size_t>(e)]) p.push_back(g.edge_at(pe).id);
    // Paths are stored from the image of the smaller endpoint; orient from u.
    VertexId start = m.vertex_map[h.edge_at(e).u];
    if (!p.empty()) {
      const Edge& first = g.edge(p.front());
      if (first.u != start && first.v != start) std::reverse(p.begin(), p.end());
      else if (p.size() >= 2) {
        // Ambiguous when the path is closed at both ends; walk to check.
        VertexId x = start;
        bool ok = true;
        for (EdgeId pe : p) {
          const Edge& ge = g.edge(pe);
          if (ge.u != x && ge.v != x) { ok = false; break; }
          x = ge.other(x);
        }
        if (!ok) std::reverse(p.begin(), p.end());
      }
    }
    m.edge_map[h.edge_at(e).id] = std::move(p);
  }
  return m;
}

inline bool is_theta(const Multigraph& h, int* k) {
  if (h.order() != 2 || h.size() == 0) return false;
  *k = static_cast<int>(h.size());
  return true;
}

}  // namespace detail

// Immersion model of H in G - forbidden, or nullopt. Exact.
inline std::optional<ImmersionModel> find_immersion(const Multigraph& h, const Multigraph& g, const EdgeSet& forbidden = {},
                                                    SearchLimits lim = {}, SearchStats* stats = nullptr) {
  Dense dh = dense(h), dg = dense(g);
  std::vector<char> alive(static_cast<std::size_t>(dg.m()), 1);
  for (EdgeId e : forbidden)
    if (g.has_edge(e)) alive[static_cast<std::size_t>(g.epos(e))] = 0;
  int k = 0;
  if (detail::is_theta(h, &k)) {
    // A theta_k immerses iff some pair has k edge-disjoint paths.
    int s = -1, p = -1;
    if (k <= 2) {
      // Any alive edge for k = 1; the ends of the first cycle-closing edge for k = 2.
      std::vector<int> parent(static_cast<std::size_t>(dg.n));
      std::iota(parent.begin(), parent.end(), 0);
      auto root = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
      };
      for (int e = 0; e < dg.m() && s < 0; ++e) {
        if (!alive[static_cast<std::size_t>(e)]) continue;
        auto [a, b] = dg.ends[static_cast<std::size_t>(e)];
        int ra = root(a), rb = root(b);
        if (k == 1 || ra == rb) {
          s = a;
          p = b;
        }
        parent[static_cast<std::size_t>(ra)] = rb;
      }
      if (s < 0) return std::nullopt;
    } else {
      // Only vertices of alive degree >= k can be theta ends.
      std::vector<int> deg(static_cast<std::size_t>(dg.n), 0);
      for (int e = 0; e < dg.m(); ++e)
        if (alive[static_cast<std::size_t>(e)]) {
          ++deg[static_cast<std::size_t>(dg.ends[static_cast<std::size_t>(e)][0])];
          ++deg[static_cast<std::size_t>(dg.ends[static_cast<std::size_t>(e)][1])];
        }
      if (std::count_if(deg.begin(), deg.end(), [&](int d) { return d >= k; }) < 2) return std::nullopt;
      CutTree t = gomory_hu(dg, alive);
      int best = -1;
      for (int x = 1; x < dg.n; ++x)
        if (t.weight[static_cast<std::size_t>(x)] >= k && (best < 0 || t.weight[static_cast<std::size_t>(x)] > t.weight[static_cast<std::size_t>(best)])) best = x;
      if (best < 0) return std::nullopt;
      s = best;
      p = t.parent[static_cast<std::size_t>(best)];
    }
    std::vector<char> src(static_cast<std::size_t>(dg.n), 0), snk(static_cast<std::size_t>(dg.n), 0);
    src[static_cast<std::size_t>(s)] = 1;
    snk[static_cast<std::size_t>(p)] = 1;
    UnitFlow uf(dg, alive);
    FlowResult fr = uf.run(src, snk, k);
    auto ps = uf.paths(fr, src, snk);
    std::vector<int> img(2);
    img[0] = s;
    img[1] = p;
    // Orient each path from the image of the first endpoint.
    std::vector<std::vector<int>> paths;
    for (int e = 0; e < k; ++e) paths.push_back(ps[static_cast<std::size_t>(e)]);
    if (stats) stats->nodes += dg.n;
    return detail::to_model(h, g, img, paths);
  }
  detail::ImmersionSearch search(dh, dg, alive, {}, lim.node_budget);
  auto res = search.run();
  if (stats) stats->nodes += search.nodes();
  if (!res) return std::nullopt;
  return detail::to_model(h, g, res->first, res->second);
}

inline bool contains_immersion(const Multigraph& h, const Multigraph& g, const EdgeSet& forbidden = {}, SearchLimits lim = {}) {
  return find_immersion(h, g, forbidden, lim).has_value();
}

// Checks the immersion-model invariants of a model against H and G.
inline bool verify_model(const Multigraph& h, const Multigraph& g, const ImmersionModel& m, const EdgeSet& forbidden = {}) {
  std::set<VertexId> imgs;
  for (VertexId a : h.vertices()) {
    auto it = m.vertex_map.find(a);
    if (it == m.vertex_map.end() || !g.has_vertex(it->second)) return false;
    if (!imgs.insert(it->second).second) return false;
  }
  std::set<EdgeId> used;
  for (const Edge& e : h.edges()) {
    auto it = m.edge_map.find(e.id);
    if (it == m.edge_map.end() || it->second.empty()) return false;
    VertexId x = m.vertex_map.at(e.u), target = m.vertex_map.at(e.v);
    for (EdgeId pe : it->second) {
      if (!g.has_edge(pe) || forbidden.contains(pe) || !used.insert(pe).second) return false;
      const Edge& ge = g.edge(pe);
      if (ge.u != x && ge.v != x) return false;
      x = ge.other(x);
    }
    if (x != target) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Families

struct GraphFamily {
  std::string name;
  std::vector<Multigraph> members;
  int bF = 1;
  std::optional<int> cF;  // nullopt = take the replacement table's largest entry
  // Shipped constants for the size bounds of the reduction pipeline.
  double c_struct = 0;  // bound on ||G|| / OPT for structure-free graphs
  double c_apx = 0;
  double c_ker = 0;

  int max_edges() const {
    int m = 0;
    for (const auto& h : members) m = std::max(m, static_cast<int>(h.size()));
    return m;
  }
  int cF_value() const { return cF.value_or(0); }
  int dF() const { return std::max(2 * bF * cF_value() + 2 * bF, 3 * max_edges()) + 1; }
};

struct FamilyReport {
  bool valid = true;
  std::vector<std::string> problems;
  int max_edges = 0;
  int dF = 0;
  int planar_subcubic_member = -1;
};

namespace detail {

// Simple graph on positions; parallel edges collapsed.
inline std::vector<std::vector<char>> simple_adjacency(const Multigraph& g) {
  std::size_t n = g.order();
  std::vector<std::vector<char>> a(n, std::vector<char>(n, 0));
  for (const Edge& e : g.edges()) {
    auto x = static_cast<std::size_t>(g.pos(e.u)), y = static_cast<std::size_t>(g.pos(e.v));
    a[x][y] = a[y][x] = 1;
  }
  return a;
}

// Does g contain a subdivision of the pattern (given on branch vertices 0..k-1)?
class SubdivisionSearch {
 public:
  SubdivisionSearch(std::vector<std::vector<char>> adj, int k, std::vector<std::pair<int, int>> pattern)
      : adj_(std::move(adj)), n_(static_cast<int>(adj_.size())), k_(k), pattern_(std::move(pattern)) {}

  bool run() {
    branch_.assign(static_cast<std::size_t>(k_), -1);
    busy_.assign(static_cast<std::size_t>(n_), 0);
    return pick(0);
  }

 private:
  bool pick(int i) {
    if (i == k_) return link(0);
    for (int v = 0; v < n_; ++v) {
      if (busy_[static_cast<std::size_t>(v)]) continue;
      int deg = 0;
      for (int w = 0; w < n_; ++w) deg += adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)];
      int need = 0;
      for (auto [a, b] : pattern_) need += (a == i) + (b == i);
      if (deg < need) continue;
      branch_[static_cast<std::size_t>(i)] = v;
      busy_[static_cast<std::size_t>(v)] = 1;
      if (pick(i + 1)) return true;
      busy_[static_cast<std::size_t>(v)] = 0;
    }
    return false;
  }

  // Internally disjoint paths between branch vertices, one per pattern edge.
  bool link(std::size_t j) {
    if (j == pattern_.size()) return true;
    int s = branch_[static_cast<std::size_t>(pattern_[j].first)], t = branch_[static_cast<std::size_t>(pattern_[j].second)];
    std::vector<int> inner;
    return walk(j, s, t, inner, s);
  }

  bool walk(std::size_t j, int x, int t, std::vector<int>& inner, int s) {
    for (int y = 0; y < n_; ++y) {
      if (!adj_[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]) continue;
      if (y == t) {
        if (x == s && used_direct(s, t)) continue;
        if (x == s) direct_.insert({std::min(s, t), std::max(s, t)});
        if (link(j + 1)) return true;
        if (x == s) direct_.erase({std::min(s, t), std::max(s, t)});
        continue;
      }
      if (busy_[static_cast<std::size_t>(y)]) continue;
      busy_[static_cast<std::size_t>(y)] = 1;
      inner.push_back(y);
      bool ok = walk(j, y, t, inner, s);
      inner.pop_back();
      busy_[static_cast<std::size_t>(y)] = 0;
      if (ok) return true;
    }
    return false;
  }

  bool used_direct(int s, int t) const { return direct_.count({std::min(s, t), std::max(s, t)}) > 0; }

  std::vector<std::vector<char>> adj_;
  int n_, k_;
  std::vector<std::pair<int, int>> pattern_;
  std::vector<int> branch_;
  std::vector<char> busy_;
  std::set<std::pair<int, int>> direct_;
};

}  // namespace detail

// Kuratowski test by exhaustive subdivision search; intended for tiny graphs.
inline bool is_planar_small(const Multigraph& g) {
  auto adj = detail::simple_adjacency(g);
  std::vector<std::pair<int, int>> k5, k33;
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b) k5.push_back({a, b});
  for (int a = 0; a < 3; ++a)
    for (int b = 3; b < 6; ++b) k33.push_back({a, b});
  if (detail::SubdivisionSearch(adj, 5, k5).run()) return false;
  if (detail::SubdivisionSearch(adj, 6, k33).run()) return false;
  return true;
}

inline FamilyReport validate_family(const GraphFamily& f) {
  FamilyReport rep;
  if (f.members.empty()) rep.problems.push_back("family has no members");
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    const auto& h = f.members[i];
    if (h.size() == 0) rep.problems.push_back("member " + std::to_string(i) + " has no edges");
    if (!is_connected(h)) rep.problems.push_back("member " + std::to_string(i) + " is disconnected");
    if (h.order() > 12) rep.problems.push_back("member " + std::to_string(i) + " is too large for the planarity check");
  }
  for (std::size_t i = 0; i < f.members.size() && rep.planar_subcubic_member < 0; ++i) {
    const auto& h = f.members[i];
    if (h.order() <= 12 && h.max_degree() <= 3 && is_planar_small(h)) rep.planar_subcubic_member = static_cast<int>(i);
  }
  if (rep.planar_subcubic_member < 0) rep.problems.push_back("no planar subcubic member");
  if (f.bF < 1) rep.problems.push_back("bF must be positive");
  rep.max_edges = f.max_edges();
  rep.dF = f.dF();
  rep.valid = rep.problems.empty();
  return rep;
}

inline void require_valid(const GraphFamily& f) {
  auto rep = validate_family(f);
  if (!rep.valid) throw FamilyError("invalid family '" + f.name + "': " + rep.problems.front());
}

inline bool is_family_free(const Multigraph& g, const GraphFamily& f, const EdgeSet& forbidden = {}, SearchLimits lim = {}) {
  for (const auto& h : f.members)
    if (find_immersion(h, g, forbidden, lim)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Boundaried graphs and relevant pairs

struct BoundariedGraph {
  Multigraph graph;
  std::vector<VertexId> boundary;  // r entries, repetitions allowed

  int r() const { return static_cast<int>(boundary.size()); }
};

struct ExtendedGraph {
  Multigraph graph;                // base graph plus pendant copies
  std::vector<VertexId> copies;    // copy of boundary vertex i
  std::vector<EdgeId> pendants;    // edge joining boundary i to its copy
};

inline ExtendedGraph extend(const BoundariedGraph& b) {
  ExtendedGraph x;
  x.graph = b.graph;
  for (VertexId u : b.boundary) {
    if (!b.graph.has_vertex(u)) throw InputError("boundary vertex not in graph");
    VertexId c{x.graph.next_vertex_id()};
    x.graph.add_vertex(c);
    x.copies.push_back(c);
    x.pendants.push_back(x.graph.add_edge(u, c));
  }
  return x;
}

// phi maps pattern vertices to 0-based boundary indices.
struct RelevantPair {
  Multigraph pattern;
  std::vector<std::pair<VertexId, int>> phi;
};

inline std::optional<ImmersionModel> find_rooted_immersion(const RelevantPair& p, const ExtendedGraph& x, const EdgeSet& forbidden = {},
                                                           SearchLimits lim = {}) {
  Dense dh = dense(p.pattern), dg = dense(x.graph);
  std::vector<char> alive(static_cast<std::size_t>(dg.m()), 1);
  for (EdgeId e : forbidden)
    if (x.graph.has_edge(e)) alive[static_cast<std::size_t>(x.graph.epos(e))] = 0;
  std::vector<int> pinned(static_cast<std::size_t>(dh.n), -1);
  for (auto [v, i] : p.phi) {
    if (i < 0 || i >= static_cast<int>(x.copies.size())) return std::nullopt;
    pinned[static_cast<std::size_t>(p.pattern.pos(v))] = x.graph.pos(x.copies[static_cast<std::size_t>(i)]);
  }
  detail::ImmersionSearch search(dh, dg, alive, pinned, lim.node_budget);
  auto res = search.run();
  if (!res) return std::nullopt;
  return detail::to_model(p.pattern, x.graph, res->first, res->second);
}

struct GlueResult {
  Multigraph graph;
  std::vector<EdgeId> glue_edges;          // edge for boundary index i
  std::map<VertexId, VertexId> b_vertex;   // vertex of B -> vertex of the gluing
  std::map<EdgeId, EdgeId> b_edge;         // edge of B -> edge of the gluing
};

// A keeps its ids; B is shifted above them.
inline GlueResult glue(const BoundariedGraph& a, const BoundariedGraph& b) {
  if (a.r() != b.r()) throw InputError("gluing boundaried graphs of different r");
  GlueResult out;
  out.graph = a.graph;
  std::int32_t voff = a.graph.next_vertex_id();
  for (VertexId v : b.graph.vertices()) {
    VertexId w{v.value + voff};
    out.graph.add_vertex(w);
    out.b_vertex[v] = w;
  }
  std::int32_t eoff = a.graph.next_edge_id();
  for (const Edge& e : b.graph.edges()) {
    EdgeId id{e.id.value + eoff};
    out.graph.add_edge(id, out.b_vertex[e.u], out.b_vertex[e.v]);
    out.b_edge[e.id] = id;
  }
  out.graph.reserve_edge_ids(eoff + b.graph.next_edge_id());
  for (int i = 0; i < a.r(); ++i)
    out.glue_edges.push_back(out.graph.add_edge(a.boundary[static_cast<std::size_t>(i)], out.b_vertex[b.boundary[static_cast<std::size_t>(i)]]));
  return out;
}

inline ColoredGraph colored(const Multigraph& g, const std::vector<int>& color) {
  ColoredGraph c;
  c.n = static_cast<int>(g.order());
  c.color = color;
  for (const Edge& e : g.edges()) c.edges.push_back({g.pos(e.u), g.pos(e.v)});
  return c;
}

inline std::vector<int> pair_code(const RelevantPair& p) {
  std::vector<int> color(p.pattern.order(), 0);
  for (auto [v, i] : p.phi) color[static_cast<std::size_t>(p.pattern.pos(v))] = i + 1;
  return canonical_form(colored(p.pattern, color)).code;
}

namespace detail {

inline RelevantPair pair_from(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<int>& color) {
  RelevantPair p;
  p.pattern = make_graph(n, edges);
  for (int v = 0; v < n; ++v)
    if (color[static_cast<std::size_t>(v)] > 0) p.phi.push_back({V(v), color[static_cast<std::size_t>(v)] - 1});
  return p;
}

// All multigraphs with at most max_edges edges and no isolated vertices, up to isomorphism.
inline std::vector<std::pair<int, std::vector<std::pair<int, int>>>> small_multigraphs(int max_edges) {
  std::vector<std::pair<int, std::vector<std::pair<int, int>>>> out;
  std::set<std::vector<int>> seen;
  std::vector<std::pair<int, std::vector<std::pair<int, int>>>> level{{0, {}}};
  out.push_back({0, {}});
  for (int m = 1; m <= max_edges; ++m) {
    std::vector<std::pair<int, std::vector<std::pair<int, int>>>> next;
    for (auto& [n, es] : level) {
      // New edge between existing vertices, existing and fresh, or two fresh ones.
      std::vector<std::pair<int, int>> options;
      for (int x = 0; x < n; ++x)
        for (int y = x + 1; y <= n; ++y) options.push_back({x, y});
      options.push_back({n, n + 1});
      for (auto [x, y] : options) {
        int nn = std::max(n, y + 1);
        auto es2 = es;
        es2.push_back({x, y});
        ColoredGraph cg{nn, std::vector<int>(static_cast<std::size_t>(nn), 0), es2};
        if (seen.insert(canonical_form(cg).code).second) next.push_back({nn, es2});
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    level = std::move(next);
  }
  return out;
}

}  // namespace detail

// Full set R_{r,F}: every Q with ||Q|| <= (r+1) MAX_F, no isolated vertex,
// with every non-empty partial function phi: V(Q) -> [r], up to isomorphism.
inline std::vector<RelevantPair> enumerate_relevant_pairs(int r, const GraphFamily& f, int edge_guard = 6) {
  int max_q = (r + 1) * f.max_edges();
  if (f.max_edges() <= 0) throw FamilyError("family member without edges");
  if (max_q > edge_guard) throw ResourceError("relevant-pair enumeration needs " + std::to_string(max_q) + " edges, guard is " + std::to_string(edge_guard));
  std::vector<RelevantPair> out;
  std::set<std::vector<int>> seen;
  for (auto& [n, es] : detail::small_multigraphs(max_q)) {
    if (n == 0) continue;
    std::vector<int> color(static_cast<std::size_t>(n), 0);
    // Enumerate colourings in base r+1.
    while (true) {
      std::size_t i = 0;
      while (i < color.size() && color[i] == r) color[i++] = 0;
      if (i == color.size()) break;
      ++color[i];
      auto code = canonical_form(ColoredGraph{n, color, es}).code;
      if (seen.insert(code).second) out.push_back(detail::pair_from(n, es, color));
    }
  }
  return out;
}

// Pairs arising from cutting a member H of F along at most r boundary
// crossings: the side of H that falls inside the boundaried graph, with
// every crossing turned into a rooted leaf. Only these pairs can witness a
// difference between two F-free boundaried graphs glued to a common host.
inline std::vector<RelevantPair> enumerate_realizable_pairs(int r, const GraphFamily& f, std::size_t guard = 200000) {
  std::vector<RelevantPair> out;
  std::set<std::vector<int>> seen;
  for (const auto& h : f.members) {
    int n = static_cast<int>(h.order());
    int m = static_cast<int>(h.size());
    for (int side = 0; side < (1 << n); ++side) {
      auto in = [&](int v) { return (side >> v) & 1; };  // 1 = inside the boundaried graph
      std::vector<int> base(static_cast<std::size_t>(m));
      int base_sum = 0;
      for (int e = 0; e < m; ++e) {
        const Edge& ed = h.edge_at(e);
        base[static_cast<std::size_t>(e)] = in(h.pos(ed.u)) != in(h.pos(ed.v)) ? 1 : 0;
        base_sum += base[static_cast<std::size_t>(e)];
      }
      if (base_sum > r) continue;
      // Extra crossings come in pairs per edge.
      std::vector<int> extra(static_cast<std::size_t>(m), 0);
      while (true) {
        int total = base_sum;
        for (int e = 0; e < m; ++e) total += 2 * extra[static_cast<std::size_t>(e)];
        if (total >= 1 && total <= r) {
          // Build Q with crossings as unlabelled leaves first.
          std::vector<int> qv(static_cast<std::size_t>(n), -1);
          int qn = 0;
          for (int v = 0; v < n; ++v)
            if (in(v)) qv[static_cast<std::size_t>(v)] = qn++;
          std::vector<std::pair<int, int>> qe;
          std::vector<int> leaves;
          for (int e = 0; e < m; ++e) {
            const Edge& ed = h.edge_at(e);
            int x = h.pos(ed.u), y = h.pos(ed.v);
            int j = base[static_cast<std::size_t>(e)] + 2 * extra[static_cast<std::size_t>(e)];
            // Walk x -> y through j crossings.
            int cur = in(x) ? qv[static_cast<std::size_t>(x)] : -1;
            bool inside = in(x);
            for (int c = 0; c < j; ++c) {
              int leaf = qn++;
              leaves.push_back(leaf);
              if (inside) qe.push_back({cur, leaf});
              inside = !inside;
              cur = leaf;
            }
            if (inside) qe.push_back({cur, qv[static_cast<std::size_t>(y)]});
          }
          // Injective labellings of the leaves.
          std::vector<int> labels(static_cast<std::size_t>(r));
          for (int i = 0; i < r; ++i) labels[static_cast<std::size_t>(i)] = i;
          std::vector<int> pick(leaves.size());
          std::vector<char> taken(static_cast<std::size_t>(r), 0);
          auto rec = [&](auto&& self, std::size_t li) -> void {
            if (li == leaves.size()) {
              std::vector<int> color(static_cast<std::size_t>(qn), 0);
              for (std::size_t q = 0; q < leaves.size(); ++q) color[static_cast<std::size_t>(leaves[q])] = pick[q] + 1;
              auto code = canonical_form(ColoredGraph{qn, color, qe}).code;
              if (seen.insert(code).second) {
                out.push_back(detail::pair_from(qn, qe, color));
                if (out.size() > guard) throw ResourceError("realizable pair enumeration exceeded guard");
              }
              return;
            }
            for (int l = 0; l < r; ++l) {
              if (taken[static_cast<std::size_t>(l)]) continue;
              taken[static_cast<std::size_t>(l)] = 1;
              pick[li] = l;
              self(self, li + 1);
              taken[static_cast<std::size_t>(l)] = 0;
            }
          };
          rec(rec, 0);
        }
        // Next extra vector with total <= r.
        int e = 0;
        while (e < m) {
          ++extra[static_cast<std::size_t>(e)];
          int t2 = base_sum;
          for (int q = 0; q < m; ++q) t2 += 2 * extra[static_cast<std::size_t>(q)];
          if (t2 <= r) break;
          extra[static_cast<std::size_t>(e)] = 0;
          ++e;
        }
        if (e == m) break;
      }
    }
  }
  return out;
}

}  // namespace imdel
