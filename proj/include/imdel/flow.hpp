#pragma once

#include <algorithm>
#include <array>
#include <climits>
#include <deque>
#include <utility>
#include <vector>

#include "imdel/multigraph.hpp"

namespace imdel {

// Position-indexed adjacency snapshot of a Multigraph.
struct Dense {
  int n = 0;
  std::vector<std::array<int, 2>> ends;
  std::vector<std::vector<std::pair<int, int>>> adj;  // (neighbour, edge)

  int m() const { return static_cast<int>(ends.size()); }
  int other(int e, int x) const { return ends[static_cast<std::size_t>(e)][0] == x ? ends[static_cast<std::size_t>(e)][1] : ends[static_cast<std::size_t>(e)][0]; }
  int degree(int x) const { return static_cast<int>(adj[static_cast<std::size_t>(x)].size()); }

  explicit Dense(int nv = 0) : n(nv), adj(static_cast<std::size_t>(nv)) {}
  int add_edge(int a, int b) {
    ends.push_back({a, b});
    int e = m() - 1;
    adj[static_cast<std::size_t>(a)].push_back({b, e});
    adj[static_cast<std::size_t>(b)].push_back({a, e});
    return e;
  }
};

inline Dense dense(const Multigraph& g) {
  Dense d(static_cast<int>(g.order()));
  for (const Edge& e : g.edges()) d.add_edge(g.pos(e.u), g.pos(e.v));
  return d;
}

// Unit-capacity undirected max flow between vertex sets. flow[e] is +1 when
// one unit travels ends[e][0] -> ends[e][1], -1 for the reverse direction.
struct FlowResult {
  int value = 0;
  std::vector<int> flow;
  std::vector<char> source_side;  // reachable from sources in the residual graph
};

class UnitFlow {
 public:
  // alive may be empty (all edges usable).
  UnitFlow(const Dense& d, std::vector<char> alive = {}) : d_(d), alive_(std::move(alive)) {
    if (alive_.empty()) alive_.assign(static_cast<std::size_t>(d.m()), 1);
  }

  FlowResult run(const std::vector<char>& src, const std::vector<char>& snk, int limit = INT_MAX) const {
    FlowResult r;
    r.flow.assign(static_cast<std::size_t>(d_.m()), 0);
    std::vector<int> via(static_cast<std::size_t>(d_.n));
    while (r.value < limit) {
      std::fill(via.begin(), via.end(), -2);
      std::deque<int> q;
      for (int x = 0; x < d_.n; ++x)
        if (src[static_cast<std::size_t>(x)]) {
          via[static_cast<std::size_t>(x)] = -1;
          q.push_back(x);
        }
      int hit = -1;
      while (!q.empty() && hit < 0) {
        int x = q.front();
        q.pop_front();
        for (auto [y, e] : d_.adj[static_cast<std::size_t>(x)]) {
          if (!alive_[static_cast<std::size_t>(e)] || via[static_cast<std::size_t>(y)] != -2) continue;
          if (residual(r.flow, e, x) <= 0) continue;
          via[static_cast<std::size_t>(y)] = e;
          if (snk[static_cast<std::size_t>(y)]) {
            hit = y;
            break;
          }
          q.push_back(y);
        }
      }
      if (hit < 0) break;
      for (int y = hit; via[static_cast<std::size_t>(y)] >= 0;) {
        int e = via[static_cast<std::size_t>(y)];
        int x = d_.other(e, y);
        r.flow[static_cast<std::size_t>(e)] += (d_.ends[static_cast<std::size_t>(e)][0] == x) ? 1 : -1;
        y = x;
      }
      ++r.value;
    }
    r.source_side = reach(r.flow, src, false);
    return r;
  }

  // Vertices from which the sinks are reachable in the residual graph.
  std::vector<char> sink_side(const FlowResult& r, const std::vector<char>& snk) const {
    return reach(r.flow, snk, true);
  }

  // Decomposes a flow into edge-disjoint source-to-sink paths (edge lists).
  std::vector<std::vector<int>> paths(const FlowResult& r, const std::vector<char>& src, const std::vector<char>& snk) const {
    std::vector<int> f = r.flow;
    std::vector<std::vector<int>> out;
    std::vector<int> at(static_cast<std::size_t>(d_.n), -1);  // index of vertex in current walk
    for (int s = 0; s < d_.n; ++s) {
      if (!src[static_cast<std::size_t>(s)]) continue;
      while (true) {
        std::vector<int> walk{s};
        std::vector<int> path;
        at[static_cast<std::size_t>(s)] = 0;
        int x = s;
        while (!snk[static_cast<std::size_t>(x)]) {
          int next = -1;
          for (auto [y, e] : d_.adj[static_cast<std::size_t>(x)]) {
            int dir = d_.ends[static_cast<std::size_t>(e)][0] == x ? 1 : -1;
            if (f[static_cast<std::size_t>(e)] != dir) continue;
            f[static_cast<std::size_t>(e)] = 0;
            next = y;
            path.push_back(e);
            break;
          }
          if (next < 0) break;
          if (at[static_cast<std::size_t>(next)] >= 0) {
            int k = at[static_cast<std::size_t>(next)];
            while (static_cast<int>(walk.size()) > k + 1) {
              at[static_cast<std::size_t>(walk.back())] = -1;
              walk.pop_back();
              path.pop_back();
            }
          } else {
            at[static_cast<std::size_t>(next)] = static_cast<int>(walk.size());
            walk.push_back(next);
          }
          x = next;
        }
        for (int w : walk) at[static_cast<std::size_t>(w)] = -1;
        if (!snk[static_cast<std::size_t>(x)] || path.empty()) break;
        out.push_back(std::move(path));
      }
    }
    return out;
  }

 private:
  int residual(const std::vector<int>& flow, int e, int from) const {
    int f = flow[static_cast<std::size_t>(e)];
    return d_.ends[static_cast<std::size_t>(e)][0] == from ? 1 - f : 1 + f;
  }

  std::vector<char> reach(const std::vector<int>& flow, const std::vector<char>& start, bool reverse) const {
    std::vector<char> seen(static_cast<std::size_t>(d_.n), 0);
    std::deque<int> q;
    for (int x = 0; x < d_.n; ++x)
      if (start[static_cast<std::size_t>(x)]) {
        seen[static_cast<std::size_t>(x)] = 1;
        q.push_back(x);
      }
    while (!q.empty()) {
      int x = q.front();
      q.pop_front();
      for (auto [y, e] : d_.adj[static_cast<std::size_t>(x)]) {
        if (!alive_[static_cast<std::size_t>(e)] || seen[static_cast<std::size_t>(y)]) continue;
        // Forward search uses x->y residual; reverse search needs y->x residual.
        int cap = reverse ? residual(flow, e, y) : residual(flow, e, x);
        if (cap <= 0) continue;
        seen[static_cast<std::size_t>(y)] = 1;
        q.push_back(y);
      }
    }
    return seen;
  }

  const Dense& d_;
  std::vector<char> alive_;
};

inline int local_edge_connectivity(const Dense& d, int a, int b, const std::vector<char>& alive = {}, int limit = INT_MAX) {
  std::vector<char> s(static_cast<std::size_t>(d.n), 0), t(static_cast<std::size_t>(d.n), 0);
  s[static_cast<std::size_t>(a)] = 1;
  t[static_cast<std::size_t>(b)] = 1;
  return UnitFlow(d, alive).run(s, t, limit).value;
}

// Gomory-Hu tree by Gusfield's method: parent[0] = -1, weight[i] = lambda(i, parent[i]).
struct CutTree {
  std::vector<int> parent;
  std::vector<int> weight;
  std::vector<std::vector<int>> lambda;  // all-pairs local edge connectivity
};

inline CutTree gomory_hu(const Dense& d, const std::vector<char>& alive = {}) {
  CutTree t;
  int n = d.n;
  t.parent.assign(static_cast<std::size_t>(n), 0);
  t.weight.assign(static_cast<std::size_t>(n), 0);
  if (n > 0) t.parent[0] = -1;
  UnitFlow uf(d, alive);
  for (int s = 1; s < n; ++s) {
    int p = t.parent[static_cast<std::size_t>(s)];
    std::vector<char> src(static_cast<std::size_t>(n), 0), snk(static_cast<std::size_t>(n), 0);
    src[static_cast<std::size_t>(s)] = 1;
    snk[static_cast<std::size_t>(p)] = 1;
    FlowResult r = uf.run(src, snk);
    t.weight[static_cast<std::size_t>(s)] = r.value;
    for (int x = 0; x < n; ++x)
      if (x != s && r.source_side[static_cast<std::size_t>(x)] && t.parent[static_cast<std::size_t>(x)] == p) t.parent[static_cast<std::size_t>(x)] = s;
    int pp = p >= 0 ? t.parent[static_cast<std::size_t>(p)] : -1;
    if (pp >= 0 && r.source_side[static_cast<std::size_t>(pp)]) {
      t.parent[static_cast<std::size_t>(s)] = pp;
      t.parent[static_cast<std::size_t>(p)] = s;
      std::swap(t.weight[static_cast<std::size_t>(s)], t.weight[static_cast<std::size_t>(p)]);
    }
  }
  // All-pairs minima along tree paths.
  t.lambda.assign(static_cast<std::size_t>(n), std::vector<int>(static_cast<std::size_t>(n), INT_MAX));
  std::vector<std::vector<std::pair<int, int>>> tadj(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x)
    if (t.parent[static_cast<std::size_t>(x)] >= 0) {
      tadj[static_cast<std::size_t>(x)].push_back({t.parent[static_cast<std::size_t>(x)], t.weight[static_cast<std::size_t>(x)]});
      tadj[static_cast<std::size_t>(t.parent[static_cast<std::size_t>(x)])].push_back({x, t.weight[static_cast<std::size_t>(x)]});
    }
  for (int s = 0; s < n; ++s) {
    std::vector<int> stack{s};
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (auto [y, w] : tadj[static_cast<std::size_t>(x)]) {
        if (seen[static_cast<std::size_t>(y)]) continue;
        seen[static_cast<std::size_t>(y)] = 1;
        t.lambda[static_cast<std::size_t>(s)][static_cast<std::size_t>(y)] = std::min(t.lambda[static_cast<std::size_t>(s)][static_cast<std::size_t>(x)], w);
        stack.push_back(y);
      }
    }
    t.lambda[static_cast<std::size_t>(s)][static_cast<std::size_t>(s)] = INT_MAX;
  }
  return t;
}

}  // namespace imdel
