#pragma once

#include <algorithm>
#include <bit>
#include <climits>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imdel/errors.hpp"
#include "imdel/flow.hpp"
#include "imdel/immersion.hpp"
#include "imdel/multigraph.hpp"

namespace imdel {

// Rooted forest with one bag per node; parent[t] < 0 marks a root.
// Bags form a near-partition of V(G) and each tree covers one component.
struct TreeCutDecomposition {
  std::vector<int> parent;
  std::vector<VertexSet> bags;

  int nodes() const { return static_cast<int>(parent.size()); }
  int add_node(int par, VertexSet bag) {
    parent.push_back(par);
    bags.push_back(std::move(bag));
    return nodes() - 1;
  }
  friend bool operator==(const TreeCutDecomposition&, const TreeCutDecomposition&) = default;
};

struct DecompositionReport {
  bool valid = true;
  std::vector<std::string> problems;
  void fail(std::string s) {
    valid = false;
    problems.push_back(std::move(s));
  }
};

inline DecompositionReport verify(const Multigraph& g, const TreeCutDecomposition& d) {
  DecompositionReport rep;
  int n = d.nodes();
  if (d.bags.size() != d.parent.size()) {
    rep.fail("parent and bag arrays differ in length");
    return rep;
  }
  std::vector<int> root(static_cast<std::size_t>(n), -1);
  for (int t = 0; t < n; ++t) {
    int x = t, steps = 0;
    while (x >= 0 && steps <= n) {
      int p = d.parent[static_cast<std::size_t>(x)];
      if (p >= n) {
        rep.fail("node " + std::to_string(x) + " has out-of-range parent");
        return rep;
      }
      if (p < 0) break;
      x = p;
      ++steps;
    }
    if (steps > n) {
      rep.fail("parent pointers of node " + std::to_string(t) + " form a cycle");
      return rep;
    }
    root[static_cast<std::size_t>(t)] = x;
  }
  std::vector<int> owner(g.order(), -1);
  for (int t = 0; t < n; ++t)
    for (VertexId v : d.bags[static_cast<std::size_t>(t)]) {
      if (!g.has_vertex(v)) {
        rep.fail("bag of node " + std::to_string(t) + " holds unknown vertex " + std::to_string(v.value));
        continue;
      }
      int& o = owner[static_cast<std::size_t>(g.pos(v))];
      if (o >= 0)
        rep.fail("vertex " + std::to_string(v.value) + " lies in bags of nodes " + std::to_string(o) + " and " + std::to_string(t));
      else
        o = t;
    }
  for (int p = 0; p < static_cast<int>(g.order()); ++p)
    if (owner[static_cast<std::size_t>(p)] < 0) rep.fail("vertex " + std::to_string(g.vertex_at(p).value) + " is in no bag");
  if (!rep.valid) return rep;
  int comps = 0;
  auto lab = component_labels(g, &comps);
  std::map<int, int> tree_of_comp;
  std::map<int, int> comp_of_tree;
  for (int p = 0; p < static_cast<int>(g.order()); ++p) {
    int tr = root[static_cast<std::size_t>(owner[static_cast<std::size_t>(p)])];
    int c = lab[static_cast<std::size_t>(p)];
    auto [it, fresh] = tree_of_comp.emplace(c, tr);
    if (!fresh && it->second != tr)
      rep.fail("component of vertex " + std::to_string(g.vertex_at(p).value) + " is split over several trees");
    auto [jt, fresh2] = comp_of_tree.emplace(tr, c);
    if (!fresh2 && jt->second != c) rep.fail("tree rooted at node " + std::to_string(tr) + " spans two graph components");
  }
  for (int t = 0; t < n; ++t)
    if (d.parent[static_cast<std::size_t>(t)] < 0 && !comp_of_tree.count(t))
      rep.fail("tree rooted at node " + std::to_string(t) + " covers no vertex");
  return rep;
}

namespace detail {

inline void require_valid(const Multigraph& g, const TreeCutDecomposition& d) {
  auto rep = verify(g, d);
  if (!rep.valid) throw PreconditionError("invalid tree-cut decomposition: " + rep.problems.front());
}

// Cached rooted structure and adhesions of a valid decomposition.
struct Layout {
  int n = 0;
  std::vector<int> parent, root, depth, tin, tout, order;
  std::vector<std::vector<int>> children;
  std::vector<int> owner;             // vertex position -> node
  std::vector<std::vector<int>> adh;  // edge positions crossing (t, parent t)

  Layout(const Multigraph& g, const TreeCutDecomposition& d) {
    require_valid(g, d);
    n = d.nodes();
    parent = d.parent;
    auto sz = static_cast<std::size_t>(n);
    root.assign(sz, -1);
    depth.assign(sz, 0);
    tin.assign(sz, 0);
    tout.assign(sz, 0);
    children.assign(sz, {});
    adh.assign(sz, {});
    for (int t = 0; t < n; ++t)
      if (parent[static_cast<std::size_t>(t)] >= 0) children[static_cast<std::size_t>(parent[static_cast<std::size_t>(t)])].push_back(t);
    int clock = 0;
    for (int r = 0; r < n; ++r) {
      if (parent[static_cast<std::size_t>(r)] >= 0) continue;
      std::vector<std::pair<int, std::size_t>> stack{{r, 0}};
      root[static_cast<std::size_t>(r)] = r;
      tin[static_cast<std::size_t>(r)] = clock++;
      order.push_back(r);
      while (!stack.empty()) {
        auto& [x, i] = stack.back();
        const auto& ch = children[static_cast<std::size_t>(x)];
        if (i == ch.size()) {
          tout[static_cast<std::size_t>(x)] = clock;
          stack.pop_back();
          continue;
        }
        int c = ch[i++];
        root[static_cast<std::size_t>(c)] = r;
        depth[static_cast<std::size_t>(c)] = depth[static_cast<std::size_t>(x)] + 1;
        tin[static_cast<std::size_t>(c)] = clock++;
        order.push_back(c);
        stack.push_back({c, 0});
      }
    }
    owner.assign(g.order(), -1);
    for (int t = 0; t < n; ++t)
      for (VertexId v : d.bags[static_cast<std::size_t>(t)]) owner[static_cast<std::size_t>(g.pos(v))] = t;
    for (int ep = 0; ep < static_cast<int>(g.size()); ++ep) {
      const Edge& e = g.edge_at(ep);
      int a = owner[static_cast<std::size_t>(g.pos(e.u))], b = owner[static_cast<std::size_t>(g.pos(e.v))];
      while (a != b) {
        if (depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)]) std::swap(a, b);
        adh[static_cast<std::size_t>(a)].push_back(ep);
        a = parent[static_cast<std::size_t>(a)];
      }
    }
  }

  bool below(int x, int t) const {
    return tin[static_cast<std::size_t>(t)] <= tin[static_cast<std::size_t>(x)] && tin[static_cast<std::size_t>(x)] < tout[static_cast<std::size_t>(t)];
  }
  int adh_size(int t, int s) const {
    return static_cast<int>(parent[static_cast<std::size_t>(t)] == s ? adh[static_cast<std::size_t>(t)].size() : adh[static_cast<std::size_t>(s)].size());
  }
  std::vector<int> neighbours(int t) const {
    std::vector<int> out;
    if (parent[static_cast<std::size_t>(t)] >= 0) out.push_back(parent[static_cast<std::size_t>(t)]);
    for (int c : children[static_cast<std::size_t>(t)]) out.push_back(c);
    std::sort(out.begin(), out.end());
    return out;
  }
  // Tree neighbour of t on the path towards node o (o != t, same tree).
  int branch(int t, int o) const {
    if (!below(o, t)) return parent[static_cast<std::size_t>(t)];
    while (parent[static_cast<std::size_t>(o)] != t) o = parent[static_cast<std::size_t>(o)];
    return o;
  }
  int max_adhesion() const {
    std::size_t m = 0;
    for (const auto& a : adh) m = std::max(m, a.size());
    return static_cast<int>(m);
  }
  int lca(int a, int b) const {
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)]) std::swap(a, b);
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
};

// Torso as a multiplicity matrix: indices [0, core) are bag vertices in id
// order, index core + i is the peripheral vertex of tree neighbour nbrs[i].
struct TorsoMatrix {
  int core = 0;
  std::vector<int> nbrs;
  std::vector<std::vector<int>> mult;
  int size() const { return static_cast<int>(mult.size()); }
  int degree(int x) const {
    int s = 0;
    for (int m : mult[static_cast<std::size_t>(x)]) s += m;
    return s;
  }
};

inline TorsoMatrix torso_matrix(const Multigraph& g, const TreeCutDecomposition& d, const Layout& L, int t) {
  TorsoMatrix tm;
  const VertexSet& bag = d.bags[static_cast<std::size_t>(t)];
  tm.core = static_cast<int>(bag.size());
  tm.nbrs = L.neighbours(t);
  int sz = tm.core + static_cast<int>(tm.nbrs.size());
  tm.mult.assign(static_cast<std::size_t>(sz), std::vector<int>(static_cast<std::size_t>(sz), 0));
  std::vector<int> group(g.order(), -1);
  for (int p = 0; p < static_cast<int>(g.order()); ++p) {
    int o = L.owner[static_cast<std::size_t>(p)];
    if (L.root[static_cast<std::size_t>(o)] != L.root[static_cast<std::size_t>(t)]) continue;
    if (o == t) {
      group[static_cast<std::size_t>(p)] = static_cast<int>(std::lower_bound(bag.begin(), bag.end(), g.vertex_at(p)) - bag.begin());
    } else {
      int b = L.branch(t, o);
      group[static_cast<std::size_t>(p)] = tm.core + static_cast<int>(std::lower_bound(tm.nbrs.begin(), tm.nbrs.end(), b) - tm.nbrs.begin());
    }
  }
  for (const Edge& e : g.edges()) {
    int a = group[static_cast<std::size_t>(g.pos(e.u))], b = group[static_cast<std::size_t>(g.pos(e.v))];
    if (a < 0 || a == b) continue;
    ++tm.mult[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    ++tm.mult[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
  }
  return tm;
}

struct Suppression {
  std::vector<int> sequence;  // peripheral indices (into nbrs) in suppression order
  std::vector<std::vector<int>> mult;
  std::vector<char> alive;
  int remaining = 0;
};

// Suppresses peripheral vertices of degree <= 2 until none is left; among
// eligible vertices the one with the smallest rank goes first.
inline Suppression suppress(const TorsoMatrix& tm, const std::vector<int>& rank = {}) {
  Suppression s;
  s.mult = tm.mult;
  int sz = tm.size();
  s.alive.assign(static_cast<std::size_t>(sz), 1);
  std::vector<int> deg(static_cast<std::size_t>(sz));
  for (int x = 0; x < sz; ++x) deg[static_cast<std::size_t>(x)] = tm.degree(x);
  auto key = [&](int i) { return rank.empty() ? i : rank[static_cast<std::size_t>(i)]; };
  while (true) {
    int pick = -1;
    for (int i = 0; i < static_cast<int>(tm.nbrs.size()); ++i) {
      int x = tm.core + i;
      if (!s.alive[static_cast<std::size_t>(x)] || deg[static_cast<std::size_t>(x)] > 2) continue;
      if (pick < 0 || key(i) < key(pick)) pick = i;
    }
    if (pick < 0) break;
    int x = tm.core + pick;
    std::vector<int> ends;
    for (int y = 0; y < sz; ++y)
      for (int k = 0; k < s.mult[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]; ++k) ends.push_back(y);
    for (int y : ends) --deg[static_cast<std::size_t>(y)];
    for (int y = 0; y < sz; ++y) s.mult[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = s.mult[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)] = 0;
    if (ends.size() == 2 && ends[0] != ends[1]) {
      int a = ends[0], b = ends[1];
      ++s.mult[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      ++s.mult[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
      ++deg[static_cast<std::size_t>(a)];
      ++deg[static_cast<std::size_t>(b)];
    }
    deg[static_cast<std::size_t>(x)] = 0;
    s.alive[static_cast<std::size_t>(x)] = 0;
    s.sequence.push_back(pick);
  }
  s.remaining = sz - static_cast<int>(s.sequence.size());
  return s;
}

inline int w_value(const TreeCutDecomposition& d, const Layout& L, int t) {
  int w = static_cast<int>(d.bags[static_cast<std::size_t>(t)].size());
  for (int s : L.neighbours(t))
    if (L.adh_size(t, s) >= 3) ++w;
  return w;
}

inline int z_value(const TreeCutDecomposition& d, const Layout& L, int t) {
  int z = static_cast<int>(d.bags[static_cast<std::size_t>(t)].size());
  for (int s : L.neighbours(t))
    if (int a = L.adh_size(t, s); a >= 3) z += a;
  return z;
}

// Undirected forest edges -> parent array, each tree rooted at roots[i].
inline std::vector<int> orient(int n, const std::vector<std::set<int>>& adj, const std::vector<int>& roots) {
  std::vector<int> parent(static_cast<std::size_t>(n), -2);
  for (int r : roots) {
    if (parent[static_cast<std::size_t>(r)] != -2) continue;
    parent[static_cast<std::size_t>(r)] = -1;
    std::vector<int> stack{r};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : adj[static_cast<std::size_t>(x)])
        if (parent[static_cast<std::size_t>(y)] == -2) {
          parent[static_cast<std::size_t>(y)] = x;
          stack.push_back(y);
        }
    }
  }
  return parent;
}

inline std::vector<std::set<int>> undirected(const TreeCutDecomposition& d) {
  std::vector<std::set<int>> adj(static_cast<std::size_t>(d.nodes()));
  for (int t = 0; t < d.nodes(); ++t)
    if (int p = d.parent[static_cast<std::size_t>(t)]; p >= 0) {
      adj[static_cast<std::size_t>(t)].insert(p);
      adj[static_cast<std::size_t>(p)].insert(t);
    }
  return adj;
}

// Roots every tree at the node holding its smallest vertex id.
inline TreeCutDecomposition root_at_smallest_vertex(const Multigraph& g, const TreeCutDecomposition& d) {
  Layout L(g, d);
  std::vector<int> roots;
  std::vector<char> seen(static_cast<std::size_t>(d.nodes()), 0);
  for (int p = 0; p < static_cast<int>(g.order()); ++p) {
    int o = L.owner[static_cast<std::size_t>(p)];
    int r = L.root[static_cast<std::size_t>(o)];
    if (seen[static_cast<std::size_t>(r)]) continue;
    seen[static_cast<std::size_t>(r)] = 1;
    roots.push_back(o);
  }
  TreeCutDecomposition out = d;
  out.parent = orient(d.nodes(), undirected(d), roots);
  return out;
}

inline bool side_connected(const Multigraph& g, const VertexSet& x) {
  return !x.empty() && is_connected(induced_subgraph(g, x));
}

}  // namespace detail

inline int width_prime(const Multigraph& g, const TreeCutDecomposition& d) {
  detail::Layout L(g, d);
  int best = L.max_adhesion();
  for (int t = 0; t < L.n; ++t) best = std::max(best, detail::w_value(d, L, t));
  return best;
}

inline int width_doubleprime(const Multigraph& g, const TreeCutDecomposition& d) {
  detail::Layout L(g, d);
  int best = 0;
  for (int t = 0; t < L.n; ++t) best = std::max(best, detail::z_value(d, L, t));
  return best;
}

inline int width(const Multigraph& g, const TreeCutDecomposition& d) {
  detail::Layout L(g, d);
  int best = L.max_adhesion();
  for (int t = 0; t < L.n; ++t) best = std::max(best, detail::suppress(detail::torso_matrix(g, d, L, t)).remaining);
  return best;
}

// Adhesion of the tree edge between t and its parent.
inline EdgeSet adhesion(const Multigraph& g, const TreeCutDecomposition& d, int t) {
  detail::Layout L(g, d);
  if (t < 0 || t >= L.n) throw InputError("unknown node " + std::to_string(t));
  std::vector<EdgeId> ids;
  for (int ep : L.adh[static_cast<std::size_t>(t)]) ids.push_back(g.edge_at(ep).id);
  return EdgeSet(ids);
}

// Vertices of the subtree below t.
inline VertexSet subtree_vertices(const TreeCutDecomposition& d, int t) {
  std::vector<std::vector<int>> ch(static_cast<std::size_t>(d.nodes()));
  for (int x = 0; x < d.nodes(); ++x)
    if (d.parent[static_cast<std::size_t>(x)] >= 0) ch[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(x)])].push_back(x);
  std::vector<VertexId> out;
  std::vector<int> stack{t};
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (VertexId v : d.bags[static_cast<std::size_t>(x)]) out.push_back(v);
    for (int c : ch[static_cast<std::size_t>(x)]) stack.push_back(c);
  }
  return VertexSet(out);
}

struct Torso {
  Multigraph graph;
  std::vector<VertexId> core;
  std::vector<VertexId> peripheral;  // fresh ids, one per tree neighbour
  std::vector<int> peripheral_nodes;
};

inline Torso torso(const Multigraph& g, const TreeCutDecomposition& d, int t) {
  detail::Layout L(g, d);
  if (t < 0 || t >= L.n) throw InputError("unknown node " + std::to_string(t));
  auto tm = detail::torso_matrix(g, d, L, t);
  Torso out;
  out.core = d.bags[static_cast<std::size_t>(t)].items();
  out.peripheral_nodes = tm.nbrs;
  std::vector<VertexId> ids = out.core;
  for (std::size_t i = 0; i < tm.nbrs.size(); ++i) {
    out.peripheral.push_back(V(g.next_vertex_id() + static_cast<int>(i)));
    ids.push_back(out.peripheral.back());
  }
  for (VertexId v : ids) out.graph.add_vertex(v);
  for (int a = 0; a < tm.size(); ++a)
    for (int b = a + 1; b < tm.size(); ++b)
      for (int k = 0; k < tm.mult[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; ++k)
        out.graph.add_edge(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
  return out;
}

// 3-center at t; `rank` orders eligible peripheral vertices (default: by
// neighbour id). The result does not depend on the order.
inline Multigraph three_center(const Multigraph& g, const TreeCutDecomposition& d, int t, const std::vector<int>& rank = {}) {
  detail::Layout L(g, d);
  if (t < 0 || t >= L.n) throw InputError("unknown node " + std::to_string(t));
  auto tm = detail::torso_matrix(g, d, L, t);
  auto s = detail::suppress(tm, rank);
  std::vector<VertexId> ids = d.bags[static_cast<std::size_t>(t)].items();
  for (std::size_t i = 0; i < tm.nbrs.size(); ++i) ids.push_back(V(g.next_vertex_id() + static_cast<int>(i)));
  Multigraph out;
  for (int x = 0; x < tm.size(); ++x)
    if (s.alive[static_cast<std::size_t>(x)]) out.add_vertex(ids[static_cast<std::size_t>(x)]);
  for (int a = 0; a < tm.size(); ++a)
    for (int b = a + 1; b < tm.size(); ++b)
      for (int k = 0; k < s.mult[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; ++k)
        out.add_edge(ids[static_cast<std::size_t>(a)], ids[static_cast<std::size_t>(b)]);
  return out;
}

// Re-hangs suppressed peripheral subtrees until every 3-center has exactly
// w(t) vertices; then width' equals width. Sum of adhesion sizes drops each step.
inline TreeCutDecomposition improve_to_width_prime(const Multigraph& g, TreeCutDecomposition d, int* steps = nullptr) {
  if (steps) *steps = 0;
  while (true) {
    detail::Layout L(g, d);
    bool moved = false;
    for (int t = 0; t < L.n && !moved; ++t) {
      auto tm = detail::torso_matrix(g, d, L, t);
      auto sup = detail::suppress(tm);
      if (sup.remaining >= detail::w_value(d, L, t)) continue;
      std::size_t p = 0;
      while (p < sup.sequence.size() && tm.degree(tm.core + sup.sequence[p]) < 3) ++p;
      if (p == sup.sequence.size()) throw std::logic_error("3-center below w(t) without a suppressed bold neighbour");
      int zp = tm.core + sup.sequence[p];
      std::vector<char> inz(static_cast<std::size_t>(tm.size()), 0);
      for (std::size_t i = 0; i < p; ++i) inz[static_cast<std::size_t>(tm.core + sup.sequence[i])] = 1;
      std::vector<int> comp(static_cast<std::size_t>(tm.size()), -1);
      std::vector<std::vector<int>> groups;
      for (int x = 0; x < tm.size(); ++x) {
        if (!inz[static_cast<std::size_t>(x)] || comp[static_cast<std::size_t>(x)] >= 0) continue;
        int id = static_cast<int>(groups.size());
        groups.push_back({});
        std::vector<int> stack{x};
        comp[static_cast<std::size_t>(x)] = id;
        while (!stack.empty()) {
          int y = stack.back();
          stack.pop_back();
          groups.back().push_back(y);
          for (int z = 0; z < tm.size(); ++z)
            if (inz[static_cast<std::size_t>(z)] && comp[static_cast<std::size_t>(z)] < 0 && tm.mult[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] > 0) {
              comp[static_cast<std::size_t>(z)] = id;
              stack.push_back(z);
            }
        }
      }
      const std::vector<int>* chosen = nullptr;
      for (const auto& grp : groups) {
        bool touches = false, closed = true;
        for (int y : grp)
          for (int z = 0; z < tm.size(); ++z) {
            if (tm.mult[static_cast<std::size_t>(y)][static_cast<std::size_t>(z)] == 0) continue;
            if (z == zp) touches = true;
            else if (comp[static_cast<std::size_t>(z)] != comp[static_cast<std::size_t>(y)]) closed = false;
          }
        if (touches && closed) {
          chosen = &grp;
          break;
        }
      }
      if (!chosen) throw std::logic_error("no closed suppressed component next to z_p");
      int tp = tm.nbrs[static_cast<std::size_t>(zp - tm.core)];
      auto adj = detail::undirected(d);
      for (int y : *chosen) {
        int tq = tm.nbrs[static_cast<std::size_t>(y - tm.core)];
        adj[static_cast<std::size_t>(t)].erase(tq);
        adj[static_cast<std::size_t>(tq)].erase(t);
        adj[static_cast<std::size_t>(tp)].insert(tq);
        adj[static_cast<std::size_t>(tq)].insert(tp);
      }
      std::vector<int> roots;
      for (int x = 0; x < L.n; ++x)
        if (d.parent[static_cast<std::size_t>(x)] < 0) roots.push_back(x);
      d.parent = detail::orient(L.n, adj, roots);
      moved = true;
      if (steps) ++*steps;
    }
    if (!moved) return d;
  }
}

inline bool is_connected_decomposition(const Multigraph& g, const TreeCutDecomposition& d) {
  detail::Layout L(g, d);
  for (int t = 0; t < L.n; ++t) {
    if (d.parent[static_cast<std::size_t>(t)] < 0) continue;
    VertexSet below = subtree_vertices(d, t);
    VertexSet whole = subtree_vertices(d, L.root[static_cast<std::size_t>(t)]);
    if (!detail::side_connected(g, below) || !detail::side_connected(g, whole - below)) return false;
  }
  return true;
}


// Splits every tree-edge side that induces a disconnected graph into one copy
// of its subtree per component, each reattached to the other endpoint. The
// sum of squared adhesion sizes drops with every split.
inline TreeCutDecomposition make_connected(const Multigraph& g, const TreeCutDecomposition& in, int* steps = nullptr) {
  detail::require_valid(g, in);
  if (steps) *steps = 0;
  std::vector<VertexSet> bags = in.bags;
  auto adj = detail::undirected(in);
  std::vector<char> alive(bags.size(), 1);
  auto side = [&](int u, int v) {
    std::vector<int> nodes{u}, stack{u};
    std::set<int> seen{u, v};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : adj[static_cast<std::size_t>(x)])
        if (seen.insert(y).second) {
          nodes.push_back(y);
          stack.push_back(y);
        }
    }
    std::sort(nodes.begin(), nodes.end());
    return nodes;
  };
  while (true) {
    bool split = false;
    for (int u = 0; u < static_cast<int>(bags.size()) && !split; ++u) {
      if (!alive[static_cast<std::size_t>(u)]) continue;
      for (int v : adj[static_cast<std::size_t>(u)]) {
        auto nodes = side(u, v);
        VertexSet x;
        for (int z : nodes) x = x | bags[static_cast<std::size_t>(z)];
        if (detail::side_connected(g, x)) continue;
        auto comps = x.empty() ? std::vector<VertexSet>{} : components(induced_subgraph(g, x));
        std::vector<std::pair<int, int>> inner;
        for (int z : nodes)
          for (int y : adj[static_cast<std::size_t>(z)])
            if (z < y && std::binary_search(nodes.begin(), nodes.end(), y)) inner.push_back({z, y});
        for (int z : nodes) {
          alive[static_cast<std::size_t>(z)] = 0;
          for (int y : adj[static_cast<std::size_t>(z)])
            if (y != z) adj[static_cast<std::size_t>(y)].erase(z);
          adj[static_cast<std::size_t>(z)].clear();
        }
        for (const VertexSet& c : comps) {
          std::map<int, int> copy;
          for (int z : nodes) {
            copy[z] = static_cast<int>(bags.size());
            bags.push_back(bags[static_cast<std::size_t>(z)] & c);
            adj.emplace_back();
            alive.push_back(1);
          }
          auto link = [&](int a, int b) {
            adj[static_cast<std::size_t>(a)].insert(b);
            adj[static_cast<std::size_t>(b)].insert(a);
          };
          for (auto [a, b] : inner) link(copy[a], copy[b]);
          link(copy[u], v);
        }
        split = true;
        if (steps) ++*steps;
        break;
      }
    }
    if (!split) break;
  }
  std::vector<int> index(bags.size(), -1);
  TreeCutDecomposition out;
  for (std::size_t z = 0; z < bags.size(); ++z)
    if (alive[z]) {
      index[z] = out.nodes();
      out.add_node(-1, bags[z]);
    }
  std::vector<std::set<int>> cadj(static_cast<std::size_t>(out.nodes()));
  for (std::size_t z = 0; z < bags.size(); ++z)
    for (int y : adj[z]) cadj[static_cast<std::size_t>(index[z])].insert(index[static_cast<std::size_t>(y)]);
  std::vector<int> roots;
  for (int t = 0; t < out.nodes(); ++t) roots.push_back(t);
  out.parent = detail::orient(out.nodes(), cadj, roots);
  return detail::root_at_smallest_vertex(g, out);
}

namespace detail {

// Bad node per the neatness definition, or -1. Ties: minimum depth, then id.
// Fills `partner` with its deepest bad neighbour (ties: smallest id).
inline int find_bad_node(const Multigraph& g, const Layout& L, int* partner) {
  int best = -1, best_b = -1;
  for (int t = 0; t < L.n; ++t) {
    int p = L.parent[static_cast<std::size_t>(t)];
    if (p < 0 || L.adh[static_cast<std::size_t>(t)].size() > 2) continue;
    if (best >= 0 && L.depth[static_cast<std::size_t>(t)] >= L.depth[static_cast<std::size_t>(best)]) continue;
    int b = -1;
    for (int ep : L.adh[static_cast<std::size_t>(t)]) {
      const Edge& e = g.edge_at(ep);
      int oa = L.owner[static_cast<std::size_t>(g.pos(e.u))], ob = L.owner[static_cast<std::size_t>(g.pos(e.v))];
      if (L.below(ob, t)) std::swap(oa, ob);
      if (ob == p || !L.below(ob, p)) continue;
      if (b < 0 || L.depth[static_cast<std::size_t>(ob)] > L.depth[static_cast<std::size_t>(b)] ||
          (L.depth[static_cast<std::size_t>(ob)] == L.depth[static_cast<std::size_t>(b)] && ob < b))
        b = ob;
    }
    if (b >= 0) {
      best = t;
      best_b = b;
    }
  }
  if (partner) *partner = best_b;
  return best;
}

}  // namespace detail

inline bool is_neat(const Multigraph& g, const TreeCutDecomposition& d) {
  if (!is_connected_decomposition(g, d)) return false;
  detail::Layout L(g, d);
  return detail::find_bad_node(g, L, nullptr) < 0;
}

// Top-down rerouting: re-hang the shallowest bad node below its deepest bad
// neighbour. Keeps connectivity, never raises width', at most |T|^2 rounds.
inline TreeCutDecomposition make_neat(const Multigraph& g, const TreeCutDecomposition& in, int* reroutings = nullptr) {
  detail::require_valid(g, in);
  if (!is_connected_decomposition(g, in)) throw PreconditionError("make_neat needs a connected decomposition");
  TreeCutDecomposition d = detail::root_at_smallest_vertex(g, in);
  if (reroutings) *reroutings = 0;
  while (true) {
    detail::Layout L(g, d);
    int b = -1;
    int t = detail::find_bad_node(g, L, &b);
    if (t < 0) return d;
    d.parent[static_cast<std::size_t>(t)] = b;
    if (reroutings) ++*reroutings;
  }
}

// One singleton bag per vertex, tree edges from a Gomory-Hu tree of each
// component. Fundamental cuts are minimum cuts, so every adhesion has size
// lambda(u, v) and both sides are connected.
inline TreeCutDecomposition gomory_hu_decomposition(const Multigraph& g) {
  TreeCutDecomposition d;
  for (const VertexSet& c : components(g)) {
    Multigraph sub = induced_subgraph(g, c);
    auto gh = gomory_hu(dense(sub));
    int base = d.nodes();
    for (int p = 0; p < static_cast<int>(sub.order()); ++p) {
      int par = gh.parent[static_cast<std::size_t>(p)];
      d.add_node(par < 0 ? -1 : base + par, VertexSet{sub.vertex_at(p)});
    }
  }
  return d;
}

enum class WidthMeasure { width, width_prime };

struct ExactWidth {
  int value = 0;
  TreeCutDecomposition decomposition;
};

namespace detail {

// Exhaustive search over rooted decompositions of one connected graph with at
// most 8 vertices. A subtree is described by its vertex union W; its root
// holds bag B and splits W \ B among child subtrees. Empty-bag nodes with at
// most two tree neighbours can be contracted away, so they are skipped.
class ExactSearch {
 public:
  ExactSearch(const Multigraph& g, WidthMeasure m) : g_(g), m_(m), n_(static_cast<int>(g.order())) {
    full_ = (1u << n_) - 1;
    mult_.assign(static_cast<std::size_t>(n_), std::vector<int>(static_cast<std::size_t>(n_), 0));
    for (const Edge& e : g.edges()) {
      int a = g.pos(e.u), b = g.pos(e.v);
      ++mult_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      ++mult_[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)];
    }
    cut_.assign(full_ + 1, 0);
    for (unsigned w = 0; w <= full_; ++w)
      for (int a = 0; a < n_; ++a)
        for (int b = 0; b < n_; ++b)
          if ((w >> a & 1u) && !(w >> b & 1u)) cut_[w] += mult_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
    memo_.assign(full_ + 1, -1);
    choice_.assign(full_ + 1, {});
  }

  ExactWidth run() {
    ExactWidth out;
    out.value = solve(full_);
    build(full_, -1, out.decomposition);
    return out;
  }

 private:
  struct Choice {
    unsigned bag = 0;
    std::vector<unsigned> blocks;
  };

  int node_cost(unsigned w, unsigned bag, const std::vector<unsigned>& blocks) const {
    bool root = w == full_;
    if (m_ == WidthMeasure::width_prime) {
      int c = std::popcount(bag);
      for (unsigned x : blocks) c += cut_[x] >= 3;
      if (!root && cut_[w] >= 3) ++c;
      return c;
    }
    TorsoMatrix tm;
    std::vector<int> group(static_cast<std::size_t>(n_), -1);
    for (int a = 0; a < n_; ++a)
      if (bag >> a & 1u) group[static_cast<std::size_t>(a)] = tm.core++;
    int k = tm.core;
    for (unsigned x : blocks) {
      for (int a = 0; a < n_; ++a)
        if (x >> a & 1u) group[static_cast<std::size_t>(a)] = k;
      tm.nbrs.push_back(k++ - tm.core);
    }
    if (!root) {
      for (int a = 0; a < n_; ++a)
        if (!(w >> a & 1u)) group[static_cast<std::size_t>(a)] = k;
      tm.nbrs.push_back(k++ - tm.core);
    }
    tm.mult.assign(static_cast<std::size_t>(k), std::vector<int>(static_cast<std::size_t>(k), 0));
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b) {
        int ga = group[static_cast<std::size_t>(a)], gb = group[static_cast<std::size_t>(b)];
        if (ga == gb) continue;
        tm.mult[static_cast<std::size_t>(ga)][static_cast<std::size_t>(gb)] += mult_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        tm.mult[static_cast<std::size_t>(gb)][static_cast<std::size_t>(ga)] += mult_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
      }
    return suppress(tm).remaining;
  }

  int solve(unsigned w) {
    if (memo_[w] >= 0) return memo_[w];
    int best = INT_MAX;
    Choice best_choice;
    std::vector<unsigned> blocks;
    // Enumerate bag B as a submask of w, then set partitions of w \ B.
    for (unsigned bag = w;; bag = (bag - 1) & w) {
      unsigned rest = w & ~bag;
      std::function<void(unsigned, int)> part = [&](unsigned left, int acc) {
        if (acc >= best) return;
        if (left == 0) {
          if (bag == 0 && blocks.size() < 2) return;
          int v = std::max(acc, node_cost(w, bag, blocks));
          if (v < best) {
            best = v;
            best_choice = Choice{bag, blocks};
          }
          return;
        }
        unsigned low = left & (~left + 1);
        unsigned others = left & ~low;
        for (unsigned sub = others;; sub = (sub - 1) & others) {
          unsigned block = sub | low;
          if (block != w) {
            int v = std::max({acc, cut_[block], solve(block)});
            blocks.push_back(block);
            part(left & ~block, v);
            blocks.pop_back();
          }
          if (sub == 0) break;
        }
      };
      part(rest, 0);
      if (bag == 0) break;
    }
    memo_[w] = best;
    choice_[w] = best_choice;
    return best;
  }

  void build(unsigned w, int parent, TreeCutDecomposition& d) const {
    const Choice& c = choice_[w];
    std::vector<VertexId> bag;
    for (int a = 0; a < n_; ++a)
      if (c.bag >> a & 1u) bag.push_back(g_.vertex_at(a));
    int t = d.add_node(parent, VertexSet(bag));
    for (unsigned x : c.blocks) build(x, t, d);
  }

  const Multigraph& g_;
  WidthMeasure m_;
  int n_;
  unsigned full_ = 0;
  std::vector<std::vector<int>> mult_;
  std::vector<int> cut_;
  std::vector<int> memo_;
  std::vector<Choice> choice_;
};

inline ExactWidth exact_connected(const Multigraph& g, WidthMeasure m) {
  if (g.order() > 8) throw ResourceError("exact tree-cut width is limited to components of at most 8 vertices, got " + std::to_string(g.order()));
  return ExactSearch(g, m).run();
}

}  // namespace detail

// Minimum width (or width') over all tree-cut decompositions, with a witness.
inline ExactWidth exact_tctw(const Multigraph& g, WidthMeasure m = WidthMeasure::width) {
  if (g.order() > 8) throw ResourceError("exact_tctw is limited to 8 vertices, got " + std::to_string(g.order()));
  ExactWidth out;
  for (const VertexSet& c : components(g)) {
    auto part = detail::exact_connected(induced_subgraph(g, c), m);
    out.value = std::max(out.value, part.value);
    int base = out.decomposition.nodes();
    for (int t = 0; t < part.decomposition.nodes(); ++t) {
      int p = part.decomposition.parent[static_cast<std::size_t>(t)];
      out.decomposition.add_node(p < 0 ? -1 : base + p, part.decomposition.bags[static_cast<std::size_t>(t)]);
    }
  }
  return out;
}

struct NeatStats {
  int improve_steps = 0;
  int connect_steps = 0;
  int reroutings = 0;
  bool used_exact = false;
};

namespace detail {

inline TreeCutDecomposition normalize(const Multigraph& g, const TreeCutDecomposition& d, NeatStats& st) {
  int a = 0, b = 0, c = 0;
  auto out = make_neat(g, make_connected(g, improve_to_width_prime(g, d, &a), &b), &c);
  st.improve_steps += a;
  st.connect_steps += b;
  st.reroutings += c;
  return out;
}

}  // namespace detail

// Neat decomposition of an F-free graph with width' <= bF. Each component
// starts from its Gomory-Hu decomposition; components of at most 8 vertices
// that exceed bF retry from an exact width'-optimal decomposition.
inline TreeCutDecomposition neat_decomposition(const Multigraph& g, const GraphFamily& f, NeatStats* stats = nullptr,
                                               bool check_free = true) {
  if (check_free && !is_family_free(g, f)) throw PreconditionError("neat_decomposition needs an F-free graph");
  NeatStats st;
  TreeCutDecomposition out;
  for (const VertexSet& c : components(g)) {
    Multigraph sub = induced_subgraph(g, c);
    auto d = detail::normalize(sub, gomory_hu_decomposition(sub), st);
    if (width_prime(sub, d) > f.bF && sub.order() <= 8) {
      st.used_exact = true;
      auto alt = detail::normalize(sub, detail::exact_connected(sub, WidthMeasure::width_prime).decomposition, st);
      if (width_prime(sub, alt) < width_prime(sub, d)) d = alt;
    }
    if (int w = width_prime(sub, d); w > f.bF)
      throw ConfigError("family " + f.name + ": neat decomposition has width' " + std::to_string(w) + " above bF = " + std::to_string(f.bF));
    int base = out.nodes();
    for (int t = 0; t < d.nodes(); ++t) {
      int p = d.parent[static_cast<std::size_t>(t)];
      out.add_node(p < 0 ? -1 : base + p, d.bags[static_cast<std::size_t>(t)]);
    }
  }
  if (stats) *stats = st;
  return out;
}

// Closure of M under least common ancestors of node pairs in the same tree.
inline std::vector<int> lca_closure(const TreeCutDecomposition& d, const std::vector<int>& m) {
  int n = d.nodes();
  for (int t : m)
    if (t < 0 || t >= n) throw InputError("unknown node " + std::to_string(t));
  std::vector<std::vector<int>> ch(static_cast<std::size_t>(n));
  std::vector<int> depth(static_cast<std::size_t>(n), 0), tin(static_cast<std::size_t>(n), 0), root(static_cast<std::size_t>(n), 0);
  for (int t = 0; t < n; ++t)
    if (d.parent[static_cast<std::size_t>(t)] >= 0) ch[static_cast<std::size_t>(d.parent[static_cast<std::size_t>(t)])].push_back(t);
  int clock = 0;
  for (int r = 0; r < n; ++r) {
    if (d.parent[static_cast<std::size_t>(r)] >= 0) continue;
    std::vector<int> stack{r};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      tin[static_cast<std::size_t>(x)] = clock++;
      root[static_cast<std::size_t>(x)] = r;
      for (auto it = ch[static_cast<std::size_t>(x)].rbegin(); it != ch[static_cast<std::size_t>(x)].rend(); ++it) {
        depth[static_cast<std::size_t>(*it)] = depth[static_cast<std::size_t>(x)] + 1;
        stack.push_back(*it);
      }
    }
  }
  auto lca = [&](int a, int b) {
    while (a != b) {
      if (depth[static_cast<std::size_t>(a)] < depth[static_cast<std::size_t>(b)]) std::swap(a, b);
      a = d.parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  std::vector<int> s = m;
  std::sort(s.begin(), s.end(), [&](int a, int b) { return tin[static_cast<std::size_t>(a)] < tin[static_cast<std::size_t>(b)]; });
  s.erase(std::unique(s.begin(), s.end()), s.end());
  std::vector<int> out = s;
  for (std::size_t i = 0; i + 1 < s.size(); ++i)
    if (root[static_cast<std::size_t>(s[i])] == root[static_cast<std::size_t>(s[i + 1])]) out.push_back(lca(s[i], s[i + 1]));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Tree neighbours of p split by whether their component of T - p hangs off p
// through a neat adhesion: thin, and every edge has an endpoint in X_p.
struct NeighbourClasses {
  std::vector<int> neat;
  std::vector<int> other;
};

inline NeighbourClasses neat_adhesion_classification(const Multigraph& g, const TreeCutDecomposition& d, int p) {
  if (p < 0 || p >= d.nodes()) throw InputError("unknown node " + std::to_string(p));
  if (!is_neat(g, d)) throw PreconditionError("neat_adhesion_classification needs a neat decomposition");
  detail::Layout L(g, d);
  NeighbourClasses out;
  for (int s : L.neighbours(p)) {
    const auto& a = L.adh[static_cast<std::size_t>(L.parent[static_cast<std::size_t>(s)] == p ? s : p)];
    bool neat = a.size() <= 2 && std::all_of(a.begin(), a.end(), [&](int ep) {
      const Edge& e = g.edge_at(ep);
      return L.owner[static_cast<std::size_t>(g.pos(e.u))] == p || L.owner[static_cast<std::size_t>(g.pos(e.v))] == p;
    });
    (neat ? out.neat : out.other).push_back(s);
  }
  return out;
}

}  // namespace imdel
