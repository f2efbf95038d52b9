#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "imdel/errors.hpp"
#include "imdel/flow.hpp"
#include "imdel/multigraph.hpp"

namespace imdel {

struct ImportantCut {
  EdgeSet cut;
  VertexSet reach;  // reachable from S in G - cut

  friend bool operator==(const ImportantCut&, const ImportantCut&) = default;
  friend auto operator<=>(const ImportantCut& a, const ImportantCut& b) {
    if (a.cut.size() != b.cut.size()) return a.cut.size() <=> b.cut.size();
    return a.cut <=> b.cut;
  }
};

namespace detail {

inline std::vector<char> reach_alive(const Dense& d, const std::vector<char>& alive, const std::vector<char>& start) {
  std::vector<char> seen = start;
  std::vector<int> stack;
  for (int x = 0; x < d.n; ++x)
    if (seen[static_cast<std::size_t>(x)]) stack.push_back(x);
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (auto [y, e] : d.adj[static_cast<std::size_t>(x)])
      if (alive[static_cast<std::size_t>(e)] && !seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = 1;
        stack.push_back(y);
      }
  }
  return seen;
}

inline bool meets(const std::vector<char>& a, const std::vector<char>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) return true;
  return false;
}

struct CutInstance {
  const Multigraph& g;
  Dense d;
  std::vector<char> s, t;

  CutInstance(const Multigraph& graph, const VertexSet& S, const VertexSet& T) : g(graph), d(dense(graph)) {
    detail::check_vertices(g, S);
    detail::check_vertices(g, T);
    if (S.empty() || T.empty()) throw InputError("important cuts need nonempty S and T");
    if (!S.disjoint(T)) throw InputError("S and T intersect");
    s = detail::membership(g, S);
    t = detail::membership(g, T);
  }

  std::vector<char> alive_without(const std::vector<int>& cut) const {
    std::vector<char> alive(static_cast<std::size_t>(d.m()), 1);
    for (int e : cut) alive[static_cast<std::size_t>(e)] = 0;
    return alive;
  }

  VertexSet to_set(const std::vector<char>& mark) const {
    std::vector<VertexId> out;
    for (int x = 0; x < d.n; ++x)
      if (mark[static_cast<std::size_t>(x)]) out.push_back(g.vertex_at(x));
    return VertexSet(std::move(out));
  }

  // Polynomial test: Delta is important iff it is a minimal cut with reach R,
  // lambda(R,T) = |Delta| and the furthest minimum (R,T)-cut keeps S's reach at R.
  bool important(const std::vector<int>& cut) const {
    auto alive = alive_without(cut);
    auto r = reach_alive(d, alive, s);
    if (meets(r, t)) return false;
    auto q = reach_alive(d, alive, t);
    for (int e : cut) {
      int a = d.ends[static_cast<std::size_t>(e)][0], b = d.ends[static_cast<std::size_t>(e)][1];
      bool ok = (r[static_cast<std::size_t>(a)] && q[static_cast<std::size_t>(b)]) || (r[static_cast<std::size_t>(b)] && q[static_cast<std::size_t>(a)]);
      if (!ok) return false;
    }
    UnitFlow uf(d);
    auto fr = uf.run(r, t, static_cast<int>(cut.size()) + 1);
    if (fr.value != static_cast<int>(cut.size())) return false;
    auto sink = uf.sink_side(fr, t);
    std::vector<char> far_alive(static_cast<std::size_t>(d.m()), 1);
    for (int e = 0; e < d.m(); ++e) {
      int a = d.ends[static_cast<std::size_t>(e)][0], b = d.ends[static_cast<std::size_t>(e)][1];
      if (sink[static_cast<std::size_t>(a)] != sink[static_cast<std::size_t>(b)]) far_alive[static_cast<std::size_t>(e)] = 0;
    }
    return reach_alive(d, far_alive, s) == r;
  }

  // Branching on the furthest minimum cut; emits a superset of the important cuts.
  void branch(std::vector<char> src, std::vector<char> alive, int k, std::vector<int>& chosen, std::set<std::vector<int>>& out) const {
    if (meets(src, t)) return;
    UnitFlow uf(d, alive);
    auto fr = uf.run(src, t, k + 1);
    if (fr.value > k) return;
    auto sink = uf.sink_side(fr, t);
    int pick = -1;
    for (int e = 0; e < d.m() && pick < 0; ++e) {
      if (!alive[static_cast<std::size_t>(e)]) continue;
      int a = d.ends[static_cast<std::size_t>(e)][0], b = d.ends[static_cast<std::size_t>(e)][1];
      if (sink[static_cast<std::size_t>(a)] != sink[static_cast<std::size_t>(b)]) pick = e;
    }
    if (pick < 0) {
      auto c = chosen;
      std::sort(c.begin(), c.end());
      out.insert(c);
      return;
    }
    std::vector<char> r(static_cast<std::size_t>(d.n));
    for (int x = 0; x < d.n; ++x) r[static_cast<std::size_t>(x)] = !sink[static_cast<std::size_t>(x)];
    int a = d.ends[static_cast<std::size_t>(pick)][0], b = d.ends[static_cast<std::size_t>(pick)][1];
    int outer = r[static_cast<std::size_t>(a)] ? b : a;
    auto grown = r;
    grown[static_cast<std::size_t>(outer)] = 1;
    branch(grown, alive, k, chosen, out);
    alive[static_cast<std::size_t>(pick)] = 0;
    chosen.push_back(pick);
    branch(r, alive, k - 1, chosen, out);
    chosen.pop_back();
  }
};

}  // namespace detail

// All important (S,T)-cuts of size at most k, sorted by size then edge ids.
inline std::vector<ImportantCut> enumerate_important_cuts(const Multigraph& g, const VertexSet& S, const VertexSet& T, int k) {
  if (k < 0) throw InputError("negative cut budget");
  detail::CutInstance inst(g, S, T);
  std::set<std::vector<int>> found;
  std::vector<int> chosen;
  inst.branch(inst.s, std::vector<char>(static_cast<std::size_t>(inst.d.m()), 1), k, chosen, found);
  std::vector<ImportantCut> out;
  for (const auto& c : found) {
    if (!inst.important(c)) continue;
    std::vector<EdgeId> ids;
    for (int e : c) ids.push_back(g.edge_at(e).id);
    out.push_back({EdgeSet(std::move(ids)), inst.to_set(detail::reach_alive(inst.d, inst.alive_without(c), inst.s))});
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CutVerdict {
  bool important = false;
  std::string reason;
  explicit operator bool() const { return important; }
};

// Definitional check by exhaustive search over cuts of size <= |cut|.
inline CutVerdict is_important_cut(const Multigraph& g, const VertexSet& S, const VertexSet& T, const EdgeSet& cut,
                                   std::uint64_t budget = 5'000'000) {
  detail::CutInstance inst(g, S, T);
  detail::check_edges(g, cut);
  std::vector<int> c;
  for (EdgeId e : cut) c.push_back(g.epos(e));
  auto r = detail::reach_alive(inst.d, inst.alive_without(c), inst.s);
  if (detail::meets(r, inst.t)) return {false, "not an (S,T)-cut"};
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto rest = c;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    if (!detail::meets(detail::reach_alive(inst.d, inst.alive_without(rest), inst.s), inst.t))
      return {false, "not minimal: edge " + std::to_string(cut[i].value) + " is redundant"};
  }
  int m = inst.d.m();
  int k = static_cast<int>(c.size());
  std::uint64_t total = 0, binom = 1;
  for (int j = 0; j <= k; ++j) {
    total += binom;
    binom = binom * static_cast<std::uint64_t>(m - j) / static_cast<std::uint64_t>(j + 1);
  }
  if (total > budget) throw ResourceError("exhaustive important-cut check exceeds budget");
  std::vector<int> pick;
  std::optional<std::string> beaten;
  auto rec = [&](auto&& self, int from) -> void {
    if (beaten) return;
    auto r2 = detail::reach_alive(inst.d, inst.alive_without(pick), inst.s);
    if (!detail::meets(r2, inst.t) && r2 != r) {
      bool superset = true;
      for (std::size_t x = 0; x < r.size(); ++x)
        if (r[x] && !r2[x]) superset = false;
      if (superset) {
        std::string ids;
        for (int e : pick) ids += (ids.empty() ? "" : ",") + std::to_string(g.edge_at(e).id.value);
        beaten = "dominated by cut {" + ids + "} with larger reach";
        return;
      }
    }
    if (static_cast<int>(pick.size()) == k) return;
    for (int e = from; e < m; ++e) {
      pick.push_back(e);
      self(self, e + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  if (beaten) return {false, *beaten};
  return {true, ""};
}

// ---------------------------------------------------------------------------
// Splitters

struct SplitterFamily {
  std::vector<int> universe;
  int a = 0, b = 0;
  std::vector<std::vector<int>> sets;  // each sorted
  bool verified = false;               // shattering checked exhaustively
};

namespace detail {

inline std::uint64_t binom_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    if (r > (1ull << 50)) return 1ull << 50;
  }
  return r;
}

// Size pairs (|A|, |B|) of the inclusion-maximal demands: each side is full
// unless the two together exhaust the universe.
inline std::vector<std::pair<int, int>> maximal_demand_sizes(int n, int a, int b) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i <= std::min(a, n); ++i) {
    int j = std::min(b, n - i);
    if (i == a || i + j == n) out.push_back({i, j});
  }
  return out;
}

inline std::uint64_t demand_count(int n, int a, int b) {
  std::uint64_t total = 0;
  for (auto [i, j] : maximal_demand_sizes(n, a, b)) total += binom_u64(n, i) * binom_u64(n - i, j);
  return total;
}

// Maximal demands (A,B) as index bitmasks over a universe of n <= 63 elements.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> splitter_demands(int n, int a, int b) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  auto combos = [&](std::uint64_t avoid, int k, auto&& emit) {
    std::vector<int> idx;
    auto rec = [&](auto&& self, int from, std::uint64_t mask) -> void {
      if (static_cast<int>(idx.size()) == k) {
        emit(mask);
        return;
      }
      for (int x = from; x < n; ++x) {
        if ((avoid >> x) & 1) continue;
        idx.push_back(x);
        self(self, x + 1, mask | (1ull << x));
        idx.pop_back();
      }
    };
    rec(rec, 0, 0);
  };
  for (auto [ka, kb] : maximal_demand_sizes(n, a, b))
    combos(0, ka, [&](std::uint64_t am) { combos(am, kb, [&](std::uint64_t bm) { out.push_back({am, bm}); }); });
  return out;
}

}  // namespace detail

// Exhaustive shattering check; throws ResourceError above the demand budget.
inline bool check_splitter(const SplitterFamily& f, std::uint64_t budget = 20'000'000) {
  int n = static_cast<int>(f.universe.size());
  if (n > 63) throw ResourceError("splitter check limited to 63 elements");
  if (detail::demand_count(n, f.a, f.b) > budget) throw ResourceError("splitter check exceeds budget");
  std::vector<std::uint64_t> masks;
  for (const auto& s : f.sets) {
    std::uint64_t m = 0;
    for (int x : s) {
      auto it = std::lower_bound(f.universe.begin(), f.universe.end(), x);
      if (it == f.universe.end() || *it != x) return false;
      m |= 1ull << (it - f.universe.begin());
    }
    masks.push_back(m);
  }
  for (auto [am, bm] : detail::splitter_demands(n, f.a, f.b)) {
    bool hit = false;
    for (std::uint64_t t : masks)
      if ((am & ~t) == 0 && (bm & t) == 0) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

// Small demand spaces: greedy cover of the maximal (A,B) demands. Larger
// ones: seeded random family sized for failure probability 1e-6, patched
// until complete whenever the demand space is small enough to check.
inline SplitterFamily splitter_family(std::vector<int> universe, int a, int b, std::uint64_t seed = 0) {
  if (a < 0 || b < 0) throw InputError("splitter parameters must be nonnegative");
  std::sort(universe.begin(), universe.end());
  universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
  SplitterFamily f{universe, a, b, {}, true};
  int n = static_cast<int>(universe.size());
  if (a == 0 || n == 0) {
    f.sets.push_back({});
    return f;
  }
  if (b == 0) {
    f.sets.push_back(universe);
    return f;
  }
  std::mt19937_64 rng(seed ^ 0x5eed5011773ull);
  double p = static_cast<double>(a) / (a + b);
  std::bernoulli_distribution coin(p);
  auto to_set = [&](std::uint64_t m) {
    std::vector<int> s;
    for (int x = 0; x < n; ++x)
      if ((m >> x) & 1) s.push_back(universe[static_cast<std::size_t>(x)]);
    return s;
  };
  std::uint64_t demand_count = n <= 63 ? detail::demand_count(n, a, b) : UINT64_MAX;
  if (demand_count <= 100'000) {
    auto demands = detail::splitter_demands(n, a, b);
    std::vector<char> covered(demands.size(), 0);
    std::size_t left = demands.size(), first = 0;
    while (left > 0) {
      while (covered[first]) ++first;
      auto [am, bm] = demands[first];
      std::uint64_t best = am;
      std::size_t best_gain = 0;
      for (int trial = 0; trial < 32; ++trial) {
        std::uint64_t t = am;
        for (int x = 0; x < n; ++x)
          if (!((am | bm) >> x & 1) && coin(rng)) t |= 1ull << x;
        std::size_t gain = 0;
        for (std::size_t i = first; i < demands.size(); ++i)
          if (!covered[i] && (demands[i].first & ~t) == 0 && (demands[i].second & t) == 0) ++gain;
        if (gain > best_gain) {
          best_gain = gain;
          best = t;
        }
      }
      for (std::size_t i = first; i < demands.size(); ++i)
        if (!covered[i] && (demands[i].first & ~best) == 0 && (demands[i].second & best) == 0) {
          covered[i] = 1;
          --left;
        }
      f.sets.push_back(to_set(best));
    }
    return f;
  }
  double q = std::pow(p, a) * std::pow(1 - p, b);
  double log_demands = (a + b) * std::log(static_cast<double>(n));
  auto count = static_cast<std::size_t>(std::ceil((log_demands + std::log(1e6)) / q));
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<int> s;
    for (int x : universe)
      if (coin(rng)) s.push_back(x);
    f.sets.push_back(std::move(s));
  }
  f.verified = false;
  if (demand_count > 2'000'000) return f;
  std::vector<std::uint64_t> masks;
  for (const auto& s : f.sets) {
    std::uint64_t m = 0;
    for (int x : s) m |= 1ull << (std::lower_bound(universe.begin(), universe.end(), x) - universe.begin());
    masks.push_back(m);
  }
  for (auto [am, bm] : detail::splitter_demands(n, a, b)) {
    bool hit = std::any_of(masks.begin(), masks.end(), [&](std::uint64_t t) { return (am & ~t) == 0 && (bm & t) == 0; });
    if (hit) continue;
    std::uint64_t t = am;
    for (int x = 0; x < n; ++x)
      if (!((am | bm) >> x & 1) && coin(rng)) t |= 1ull << x;
    masks.push_back(t);
    f.sets.push_back(to_set(t));
  }
  f.verified = true;
  return f;
}

}  // namespace imdel
