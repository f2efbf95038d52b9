#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "imdel/canon.hpp"
#include "imdel/cuts.hpp"
#include "imdel/errors.hpp"
#include "imdel/immersion.hpp"
#include "imdel/multigraph.hpp"

namespace imdel {

// Dynamic bitset over the canonical relevant-pair order.
class PairMask {
 public:
  PairMask() = default;
  explicit PairMask(int n) : n_(n), w_(static_cast<std::size_t>((n + 63) / 64), 0) {}

  int bits() const { return n_; }
  bool test(int i) const { return (w_[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1u; }
  void set(int i) { w_[static_cast<std::size_t>(i / 64)] |= std::uint64_t{1} << (i % 64); }
  bool any() const {
    return std::any_of(w_.begin(), w_.end(), [](std::uint64_t x) { return x != 0; });
  }
  int count() const {
    int c = 0;
    for (auto x : w_) c += std::popcount(x);
    return c;
  }
  bool subset_of(const PairMask& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & ~o.w_[i]) return false;
    return true;
  }
  bool disjoint(const PairMask& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & o.w_[i]) return false;
    return true;
  }
  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (auto it = w_.rbegin(); it != w_.rend(); ++it)
      for (int sh = 60; sh >= 0; sh -= 4) s.push_back(digits[(*it >> sh) & 15u]);
    return s;
  }
  friend bool operator==(const PairMask&, const PairMask&) = default;
  friend auto operator<=>(const PairMask&, const PairMask&) = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> w_;
};

// levels[s] holds the inclusion-minimal sets of pairs that can stay rooted in
// the extended graph after at most s deletions; value(S) is the least s with
// a member of levels[s] disjoint from S. levels[r] = {empty set} always.
struct Signature {
  int r = 0;
  int pairs = 0;
  std::vector<std::vector<PairMask>> levels;

  int value(const PairMask& s) const {
    for (int l = 0; l <= r; ++l)
      for (const auto& a : levels[static_cast<std::size_t>(l)])
        if (a.disjoint(s)) return l;
    return r;
  }

  // Every subset as a bitmask; only for small pair sets.
  std::map<std::uint32_t, int> values() const {
    if (pairs > 20) throw ResourceError("signature table too large to list");
    std::map<std::uint32_t, int> out;
    for (std::uint32_t m = 0; m < (1u << pairs); ++m) {
      PairMask s(pairs);
      for (int i = 0; i < pairs; ++i)
        if ((m >> i) & 1u) s.set(i);
      out[m] = value(s);
    }
    return out;
  }

  std::string key() const {
    std::string k = "r" + std::to_string(r) + "p" + std::to_string(pairs);
    for (const auto& lv : levels) {
      k += '|';
      for (const auto& a : lv) k += a.hex() + ",";
    }
    return k;
  }

  friend bool operator==(const Signature&, const Signature&) = default;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> weight(const BoundariedGraph& b) { return {b.graph.size(), b.graph.order()}; }

class RootedSearch {
 public:
  RootedSearch(const BoundariedGraph& b, std::span<const RelevantPair> pairs, SearchLimits lim)
      : x_(extend(b)), pairs_(pairs), lim_(lim) {}

  const ExtendedGraph& ext() const { return x_; }

  std::optional<EdgeSet> model(int p, const EdgeSet& deleted) const {
    auto m = find_rooted_immersion(pairs_[static_cast<std::size_t>(p)], x_, deleted, lim_);
    if (!m) return std::nullopt;
    return m->used_edges();
  }

  // Models after additionally deleting e, reusing witnesses that avoid e.
  std::vector<std::optional<EdgeSet>> update(const std::vector<std::optional<EdgeSet>>& models, const EdgeSet& deleted, EdgeId e) const {
    auto out = models;
    for (int p = 0; p < static_cast<int>(out.size()); ++p) {
      auto& m = out[static_cast<std::size_t>(p)];
      if (m && m->contains(e)) m = model(p, deleted);
    }
    return out;
  }

  std::vector<std::optional<EdgeSet>> initial() const {
    std::vector<std::optional<EdgeSet>> out;
    for (int p = 0; p < static_cast<int>(pairs_.size()); ++p) out.push_back(model(p, {}));
    return out;
  }

  PairMask alive(const std::vector<std::optional<EdgeSet>>& models) const {
    PairMask a(static_cast<int>(pairs_.size()));
    for (int p = 0; p < static_cast<int>(models.size()); ++p)
      if (models[static_cast<std::size_t>(p)]) a.set(p);
    return a;
  }

  int pair_count() const { return static_cast<int>(pairs_.size()); }

 private:
  ExtendedGraph x_;
  std::span<const RelevantPair> pairs_;
  SearchLimits lim_;
};

inline std::vector<PairMask> minimal_sets(std::vector<PairMask> xs) {
  std::sort(xs.begin(), xs.end(), [](const PairMask& a, const PairMask& b) {
    int ca = a.count(), cb = b.count();
    return ca != cb ? ca < cb : a < b;
  });
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<PairMask> out;
  for (const auto& x : xs)
    if (std::none_of(out.begin(), out.end(), [&](const PairMask& y) { return y.subset_of(x); })) out.push_back(x);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

// Bounded brute force. Any deletion set L* kills some pair p alive after the
// current L, and L* - L must hit p's witness model; branching on the union of
// witness edges therefore reaches, inside every L*, a set whose alive pairs
// are contained in those of L*.
inline Signature compute_signature(const BoundariedGraph& b, std::span<const RelevantPair> pairs, SearchLimits lim = {}) {
  detail::RootedSearch rs(b, pairs, lim);
  int r = b.r();
  int np = rs.pair_count();
  std::vector<std::vector<PairMask>> found(static_cast<std::size_t>(r + 1));
  std::set<std::vector<EdgeId>> seen;
  std::vector<EdgeId> del;
  auto rec = [&](auto&& self, const std::vector<std::optional<EdgeSet>>& models) -> void {
    auto sorted = del;
    std::sort(sorted.begin(), sorted.end());
    if (!seen.insert(sorted).second) return;
    PairMask a = rs.alive(models);
    found[del.size()].push_back(a);
    if (static_cast<int>(del.size()) == r || !a.any()) return;
    EdgeSet hit;
    for (const auto& m : models)
      if (m) hit = hit | *m;
    for (EdgeId e : hit) {
      del.push_back(e);
      EdgeSet ds(del);
      self(self, rs.update(models, ds, e));
      del.pop_back();
    }
  };
  rec(rec, rs.initial());
  Signature s;
  s.r = r;
  s.pairs = np;
  std::vector<PairMask> acc;
  for (int l = 0; l <= r; ++l) {
    acc.insert(acc.end(), found[static_cast<std::size_t>(l)].begin(), found[static_cast<std::size_t>(l)].end());
    acc = detail::minimal_sets(acc);
    s.levels.push_back(acc);
  }
  return s;
}

inline Signature compute_signature(const BoundariedGraph& b, const GraphFamily& f, SearchLimits lim = {}) {
  if (b.r() > 2 * f.bF) throw PreconditionError("boundary larger than 2 bF");
  if (!is_family_free(b.graph, f)) throw PreconditionError("signature needs an F-free boundaried graph");
  auto pairs = enumerate_realizable_pairs(b.r(), f);
  return compute_signature(b, pairs, lim);
}

// Smallest deletion set in extended(B) (ids of B, pendants as ext ids) that
// leaves only pairs of `target` rooted, with at most `budget` edges.
inline std::optional<EdgeSet> deletion_matching(const BoundariedGraph& b, std::span<const RelevantPair> pairs, const PairMask& target,
                                                int budget, SearchLimits lim = {}) {
  detail::RootedSearch rs(b, pairs, lim);
  std::vector<EdgeId> del;
  std::optional<EdgeSet> best;
  std::set<std::vector<EdgeId>> seen;
  auto rec = [&](auto&& self, const std::vector<std::optional<EdgeSet>>& models, int cap) -> void {
    auto sorted = del;
    std::sort(sorted.begin(), sorted.end());
    if (!seen.insert(sorted).second) return;
    PairMask a = rs.alive(models);
    int p = -1;
    for (int i = 0; i < rs.pair_count() && p < 0; ++i)
      if (a.test(i) && !target.test(i)) p = i;
    if (p < 0) {
      best = EdgeSet(sorted);
      return;
    }
    if (static_cast<int>(del.size()) == cap) return;
    for (EdgeId e : *models[static_cast<std::size_t>(p)]) {
      del.push_back(e);
      EdgeSet ds(del);
      self(self, rs.update(models, ds, e), cap);
      del.pop_back();
      if (best) return;
    }
  };
  auto init = rs.initial();
  // Iterative deepening keeps the result as small as possible.
  for (int cap = 0; cap <= budget && !best; ++cap) {
    seen.clear();
    rec(rec, init, cap);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Replacement table

enum class Provenance { enumerated, observed };

struct TableEntry {
  BoundariedGraph graph;
  Provenance provenance = Provenance::enumerated;
};

namespace detail {

// Canonical code of a boundaried graph (vertex colour = set of boundary indices).
inline std::optional<std::string> boundaried_code(const BoundariedGraph& b, long budget = 20000) {
  std::vector<int> color(b.graph.order(), 0);
  for (int i = 0; i < b.r(); ++i) color[static_cast<std::size_t>(b.graph.pos(b.boundary[static_cast<std::size_t>(i)]))] |= 1 << i;
  try {
    auto cf = canonical_form(colored(b.graph, color), budget);
    std::string s = std::to_string(b.r()) + ":";
    for (int x : cf.code) s += std::to_string(x) + ",";
    return s;
  } catch (const ResourceError&) {
    return std::nullopt;
  }
}

// Rooted immersion of boundaried graph `small` in `big` fixing boundary indices.
inline bool rooted_immersion_of(const BoundariedGraph& small, const BoundariedGraph& big) {
  if (small.r() != big.r()) return false;
  auto xs = extend(small);
  RelevantPair p;
  p.pattern = xs.graph;
  for (int i = 0; i < small.r(); ++i) p.phi.push_back({xs.copies[static_cast<std::size_t>(i)], i});
  return find_rooted_immersion(p, extend(big)).has_value();
}

}  // namespace detail

namespace detail {

inline std::vector<int> labelled_key(const BoundariedGraph& b) {
  std::vector<int> k;
  for (VertexId v : b.graph.vertices()) k.push_back(v.value);
  k.push_back(-1);
  for (const Edge& e : b.graph.edges()) {
    k.push_back(e.id.value);
    k.push_back(e.u.value);
    k.push_back(e.v.value);
  }
  k.push_back(-1);
  for (VertexId v : b.boundary) k.push_back(v.value);
  return k;
}

}  // namespace detail

class ReplacementTable {
 public:
  explicit ReplacementTable(GraphFamily f, bool immersion_respecting = false)
      : family_(std::move(f)), immersion_respecting_(immersion_respecting) {
    require_valid(family_);
  }

  const GraphFamily& family() const { return family_; }
  bool immersion_respecting() const { return immersion_respecting_; }

  const std::vector<RelevantPair>& pairs(int r) {
    auto it = pairs_.find(r);
    if (it == pairs_.end()) it = pairs_.emplace(r, enumerate_realizable_pairs(r, family_)).first;
    return it->second;
  }

  // Memoised by canonical code; the caller guarantees F-freeness.
  // Labelled graphs recur across replacement rounds, so an exact id-level key
  // is tried before canonization.
  Signature signature(const BoundariedGraph& b) {
    auto label = detail::labelled_key(b);
    if (auto it = labelled_.find(label); it != labelled_.end()) return it->second;
    auto code = detail::boundaried_code(b);
    if (code) {
      auto it = memo_.find(*code);
      if (it != memo_.end()) {
        labelled_.emplace(std::move(label), it->second);
        return it->second;
      }
    }
    auto s = compute_signature(b, pairs(b.r()));
    if (code) memo_.emplace(*code, s);
    labelled_.emplace(std::move(label), s);
    return s;
  }

  // Inserts b when its class is new or b is smaller (or, in immersion mode,
  // rooted-immersion-incomparable with the stored ones). F-freeness checked.
  bool offer(const BoundariedGraph& b, Provenance p) {
    if (!is_family_free(b.graph, family_)) return false;
    auto key = signature(b).key();
    auto& list = entries_[key];
    if (!immersion_respecting_) {
      if (!list.empty() && detail::weight(list.front().graph) <= detail::weight(b)) return false;
      list.assign(1, TableEntry{b, p});
      return true;
    }
    for (const auto& e : list)
      if (detail::rooted_immersion_of(e.graph, b)) return false;
    std::erase_if(list, [&](const TableEntry& e) { return detail::rooted_immersion_of(b, e.graph); });
    list.push_back(TableEntry{b, p});
    std::sort(list.begin(), list.end(), [](const TableEntry& x, const TableEntry& y) { return detail::weight(x.graph) < detail::weight(y.graph); });
    return true;
  }

  const std::vector<TableEntry>* lookup(const Signature& s) const {
    auto it = entries_.find(s.key());
    return it == entries_.end() || it->second.empty() ? nullptr : &it->second;
  }

  const std::map<std::string, std::vector<TableEntry>>& entries() const { return entries_; }
  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [k, v] : entries_) n += v.size();
    return n;
  }

  // Largest enumerated representative with r <= 2bF; the operational cF when unset.
  int enumerated_max() const {
    int m = 0;
    for (const auto& [k, v] : entries_)
      for (const auto& e : v)
        if (e.provenance == Provenance::enumerated && e.graph.r() <= 2 * family_.bF) m = std::max(m, static_cast<int>(e.graph.graph.size()));
    return m;
  }
  int cF() const { return family_.cF ? *family_.cF : enumerated_max(); }
  int dF() const {
    GraphFamily f = family_;
    f.cF = cF();
    return f.dF();
  }

  std::map<int, int> budgets;  // r -> largest enumeration budget applied

 private:
  GraphFamily family_;
  bool immersion_respecting_;
  std::map<int, std::vector<RelevantPair>> pairs_;
  std::map<std::string, Signature> memo_;
  std::map<std::vector<int>, Signature> labelled_;
  std::map<std::string, std::vector<TableEntry>> entries_;
};

// All F-free r-boundaried graphs with at most `budget` edges in which every
// component meets the boundary, inserted in order of increasing size.
inline ReplacementTable& extend_table(ReplacementTable& table, int r, int budget) {
  if (r < 0 || budget < 0) throw InputError("negative table parameters");
  auto bases = detail::small_multigraphs(budget);
  std::stable_sort(bases.begin(), bases.end(), [](const auto& a, const auto& b) { return a.second.size() < b.second.size(); });
  std::set<std::string> seen;
  for (const auto& [n, es] : bases) {
    auto base = make_graph(n, es);
    if (!is_family_free(base, table.family())) continue;
    int comps = 0;
    auto lab = component_labels(base, &comps);
    for (int iso = 0; iso <= r; ++iso) {
      int total = n + iso;
      if (total == 0) {
        if (r == 0) table.offer(BoundariedGraph{Multigraph{}, {}}, Provenance::enumerated);
        continue;
      }
      Multigraph g = base;
      for (int i = 0; i < iso; ++i) g.add_vertex(V(n + i));
      std::vector<int> tuple(static_cast<std::size_t>(r), 0);
      while (true) {
        std::vector<char> comp_hit(static_cast<std::size_t>(comps), 0), iso_hit(static_cast<std::size_t>(iso), 0);
        for (int v : tuple) {
          if (v < n)
            comp_hit[static_cast<std::size_t>(lab[static_cast<std::size_t>(v)])] = 1;
          else
            iso_hit[static_cast<std::size_t>(v - n)] = 1;
        }
        bool ok = std::all_of(comp_hit.begin(), comp_hit.end(), [](char c) { return c; }) &&
                  std::all_of(iso_hit.begin(), iso_hit.end(), [](char c) { return c; });
        if (ok) {
          BoundariedGraph b{g, {}};
          for (int v : tuple) b.boundary.push_back(V(v));
          auto code = detail::boundaried_code(b);
          if (!code || seen.insert(*code).second) table.offer(b, Provenance::enumerated);
        }
        int i = 0;
        while (i < r && tuple[static_cast<std::size_t>(i)] == total - 1) tuple[static_cast<std::size_t>(i++)] = 0;
        if (i == r) break;
        ++tuple[static_cast<std::size_t>(i)];
      }
    }
  }
  table.budgets[r] = std::max(table.budgets.count(r) ? table.budgets[r] : 0, budget);
  return table;
}

// Table filled for every r <= 2 bF with the given per-r budgets (last one repeats).
inline ReplacementTable default_table(const GraphFamily& f, std::vector<int> budgets = {}, bool immersion_respecting = false) {
  ReplacementTable t(f, immersion_respecting);
  if (budgets.empty()) budgets = {2, 2, 3, 2, 2, 1, 1};
  for (int r = 0; r <= 2 * f.bF; ++r) extend_table(t, r, budgets[static_cast<std::size_t>(std::min<int>(r, static_cast<int>(budgets.size()) - 1))]);
  return t;
}

// ---------------------------------------------------------------------------
// Protrusions

struct ProtrusionPart {
  BoundariedGraph part;           // G[X] with the ids of G
  std::vector<EdgeId> glue;       // delta(X) sorted; glue[i] attaches boundary i
  std::vector<VertexId> outside;  // endpoint of glue[i] outside X
};

inline ProtrusionPart cut_out(const Multigraph& g, const VertexSet& x) {
  ProtrusionPart p;
  p.part.graph = induced_subgraph(g, x);
  for (EdgeId e : boundary(g, x)) {
    const Edge& ed = g.edge(e);
    bool u_in = x.contains(ed.u);
    p.glue.push_back(e);
    p.part.boundary.push_back(u_in ? ed.u : ed.v);
    p.outside.push_back(u_in ? ed.v : ed.u);
  }
  return p;
}

namespace detail {

// Immersion-preserving shrinking steps, accepted while the signature holds.
inline BoundariedGraph shrink(ReplacementTable& table, BoundariedGraph b, std::size_t max_edges) {
  if (b.graph.size() > max_edges) return b;
  auto target = table.signature(b);
  bool progress = true;
  while (progress) {
    progress = false;
    std::vector<BoundariedGraph> moves;
    std::set<VertexId> bset(b.boundary.begin(), b.boundary.end());
    for (const Edge& e : b.graph.edges()) moves.push_back({delete_edges(b.graph, {e.id}), b.boundary});
    for (VertexId v : b.graph.vertices()) {
      if (bset.count(v)) continue;
      auto inc = b.graph.incident(v);
      if (inc.empty()) {
        moves.push_back({delete_vertices(b.graph, {v}), b.boundary});
      } else if (inc.size() == 2) {
        const Edge& e1 = b.graph.edge_at(inc[0]);
        const Edge& e2 = b.graph.edge_at(inc[1]);
        VertexId a = e1.other(v), c = e2.other(v);
        Multigraph h = delete_vertices(b.graph, {v});
        if (a != c) h.add_edge(a, c);
        moves.push_back({h, b.boundary});
      }
    }
    for (auto& m : moves) {
      // Components away from the boundary never matter; drop them.
      bool touches = true;
      int comps = 0;
      auto lab = component_labels(m.graph, &comps);
      std::vector<char> hit(static_cast<std::size_t>(comps), 0);
      for (VertexId v : m.boundary) hit[static_cast<std::size_t>(lab[static_cast<std::size_t>(m.graph.pos(v))])] = 1;
      for (char c : hit) touches = touches && c;
      if (!touches) continue;
      if (table.signature(m) == target) {
        b = std::move(m);
        progress = true;
        break;
      }
    }
  }
  return b;
}

}  // namespace detail

struct ProtrusionOptions {
  enum class Route { boundary_enumeration, splitter } route = Route::boundary_enumeration;
  std::uint64_t seed = 0;
  std::size_t shrink_limit = 40;  // largest part handed to the greedy shrinker
};

// A same-signature representative with fewer edges, if the table (possibly
// after shrinking the part itself) knows one.
inline std::optional<BoundariedGraph> smaller_representative(ReplacementTable& table, const BoundariedGraph& b, const ProtrusionOptions& opt = {}) {
  auto sig = table.signature(b);
  auto pick = [&]() -> std::optional<BoundariedGraph> {
    const auto* list = table.lookup(sig);
    if (!list) return std::nullopt;
    for (const auto& e : *list) {
      if (e.graph.graph.size() >= b.graph.size()) continue;
      if (table.immersion_respecting() && !detail::rooted_immersion_of(e.graph, b)) continue;
      return e.graph;
    }
    return std::nullopt;
  };
  if (auto rep = pick()) return rep;
  auto small = detail::shrink(table, b, opt.shrink_limit);
  if (small.graph.size() < b.graph.size()) {
    table.offer(small, Provenance::observed);
    if (auto rep = pick()) return rep;
    return small;
  }
  table.offer(b, Provenance::observed);
  return std::nullopt;
}

namespace detail {

inline bool protrusion_shape(const Multigraph& g, const VertexSet& x, ReplacementTable& table) {
  const auto& f = table.family();
  if (x.empty()) return false;
  if (static_cast<int>(boundary(g, x).size()) > 2 * f.bF) return false;
  auto gx = induced_subgraph(g, x);
  if (static_cast<int>(gx.size()) <= table.cF()) return false;
  return is_family_free(gx, f);
}

}  // namespace detail

namespace detail {

// Vertex sets with at most 2bF boundary edges and more than cF inner edges,
// largest first. Shape (F-freeness) is left to the caller.
inline std::vector<VertexSet> protrusion_candidates(const Multigraph& g, ReplacementTable& table, const ProtrusionOptions& opt) {
  const auto& f = table.family();
  int cf = table.cF();
  std::set<VertexSet> found;
  int m = static_cast<int>(g.size());
  if (opt.route == ProtrusionOptions::Route::boundary_enumeration) {
    std::vector<int> pick;
    std::vector<std::pair<int, int>> ends;
    for (int e = 0; e < m; ++e) ends.push_back({g.pos(g.edge_at(e).u), g.pos(g.edge_at(e).v)});
    auto n = static_cast<std::size_t>(g.order());
    std::vector<VertexId> vs(g.vertices().begin(), g.vertices().end());
    std::vector<int> parent(n);
    auto root = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      return x;
    };
    auto rec = [&](auto&& self, int from, int size) -> void {
      if (static_cast<int>(pick.size()) == size) {
        // Every picked edge must join two different sides and each side is one component.
        std::iota(parent.begin(), parent.end(), 0);
        std::size_t p = 0;
        for (int e = 0; e < m; ++e) {
          if (p < pick.size() && pick[p] == e) {
            ++p;
            continue;
          }
          int a = root(ends[static_cast<std::size_t>(e)].first), b = root(ends[static_cast<std::size_t>(e)].second);
          if (a != b) parent[static_cast<std::size_t>(a)] = b;
        }
        std::map<int, std::vector<VertexId>> parts;
        for (std::size_t i = 0; i < n; ++i) parts[root(static_cast<int>(i))].push_back(vs[i]);
        if (size > 0 && parts.size() < 2) return;
        std::vector<EdgeId> ids;
        for (int e : pick) ids.push_back(g.edge_at(e).id);
        EdgeSet d(ids);
        for (auto& [r, members] : parts) {
          // All picked edges must cross the side exactly once.
          bool ok = true;
          for (int e : pick) {
            bool a = root(ends[static_cast<std::size_t>(e)].first) == r, b = root(ends[static_cast<std::size_t>(e)].second) == r;
            ok = ok && (a != b);
          }
          if (!ok) continue;
          VertexSet c(std::move(members));
          if (boundary(g, c) == d) found.insert(std::move(c));
        }
        return;
      }
      for (int e = from; e < m; ++e) {
        pick.push_back(e);
        self(self, e + 1, size);
        pick.pop_back();
      }
    };
    for (int size = 0; size <= std::min(2 * f.bF, m); ++size) rec(rec, 0, size);
  } else {
    // Contract a splitter set, guess S and the contracted target vertex, and
    // take the target side of every important cut.
    std::vector<int> universe;
    for (const Edge& e : g.edges()) universe.push_back(e.id.value);
    auto fam = splitter_family(universe, cf + 1, 2 * f.bF, opt.seed);
    std::vector<VertexId> vs(g.vertices().begin(), g.vertices().end());
    for (const auto& set : fam.sets) {
      std::vector<EdgeId> ids;
      for (int e : set) ids.push_back(E(e));
      auto con = contract_edges(g, EdgeSet(ids));
      const auto& h = con.graph;
      std::vector<VertexId> hv(h.vertices().begin(), h.vertices().end());
      for (std::size_t i = 0; i < hv.size(); ++i)
        for (std::size_t j = i; j < hv.size(); ++j) {
          VertexSet s{hv[i], hv[j]};
          for (VertexId t : hv) {
            if (s.contains(t)) continue;
            for (const auto& cut : enumerate_important_cuts(h, s, {t}, 2 * f.bF)) {
              auto rest = delete_edges(h, cut.cut);
              auto lab = component_labels(rest);
              int tl = lab[static_cast<std::size_t>(rest.pos(t))];
              std::vector<VertexId> x;
              for (VertexId v : vs)
                if (lab[static_cast<std::size_t>(rest.pos(con.merge[v]))] == tl) x.push_back(v);
              found.insert(VertexSet(x));
            }
          }
        }
    }
  }
  std::vector<std::pair<std::size_t, VertexSet>> ranked;
  for (const auto& x : found) {
    auto in = imdel::detail::membership(g, x);
    std::size_t inner = 0, cross = 0;
    for (const Edge& e : g.edges()) {
      int c = in[static_cast<std::size_t>(g.pos(e.u))] + in[static_cast<std::size_t>(g.pos(e.v))];
      inner += c == 2;
      cross += c == 1;
    }
    if (static_cast<int>(cross) <= 2 * f.bF && static_cast<int>(inner) > cf) ranked.push_back({inner, x});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<VertexSet> out;
  for (auto& [size, x] : ranked) out.push_back(std::move(x));
  return out;
}

}  // namespace detail

// Some 2bF-protrusion X with ||G[X]|| > cF for which a strictly smaller
// same-signature representative exists, or nullopt. Candidates are tried
// largest first so one round removes as much as possible.
inline std::optional<VertexSet> find_replaceable_protrusion(const Multigraph& g, ReplacementTable& table, const ProtrusionOptions& opt = {}) {
  if (!is_connected(g)) throw PreconditionError("protrusion search needs a connected graph");
  // Nothing excessive fits, so absence is certified outright.
  if (static_cast<int>(g.size()) <= 2 * table.family().bF * table.cF()) return std::nullopt;
  for (const auto& x : detail::protrusion_candidates(g, table, opt))
    if (detail::protrusion_shape(g, x, table) && smaller_representative(table, cut_out(g, x).part, opt)) return x;
  return std::nullopt;
}

// Any 2bF-protrusion X with ||G[X]|| > cF, replaceable or not.
inline std::optional<VertexSet> find_excessive_protrusion(const Multigraph& g, ReplacementTable& table, const ProtrusionOptions& opt = {}) {
  if (!is_connected(g)) throw PreconditionError("protrusion search needs a connected graph");
  for (const auto& x : detail::protrusion_candidates(g, table, opt))
    if (detail::protrusion_shape(g, x, table)) return x;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Traces and lifting

struct ReplacementRecord {
  ProtrusionPart removed;
  BoundariedGraph inserted;  // ids as placed in the reduced graph
};

struct PruneRecord {
  std::string rule;
  VertexSet removed_vertices;
  EdgeSet removed_edges;  // includes edges of removed vertices
  EdgeSet delta;          // the isolating set of the bounding argument
  EdgeSet guarded;        // edges incident to the isolated components
};

struct ReductionTrace {
  Multigraph source;
  std::vector<std::variant<ReplacementRecord, PruneRecord>> steps;

  std::size_t replacements() const {
    return static_cast<std::size_t>(std::count_if(steps.begin(), steps.end(), [](const auto& s) { return std::holds_alternative<ReplacementRecord>(s); }));
  }
  std::size_t prunings() const { return steps.size() - replacements(); }
};

namespace detail {

inline Multigraph apply_replacement(const Multigraph& g, const ReplacementRecord& rec) {
  Multigraph h = delete_vertices(g, rec.removed.part.graph.vertex_set());
  for (VertexId v : rec.inserted.graph.vertices()) h.add_vertex(v);
  for (const Edge& e : rec.inserted.graph.edges()) h.add_edge(e.id, e.u, e.v);
  for (std::size_t i = 0; i < rec.removed.glue.size(); ++i)
    h.add_edge(rec.removed.glue[i], rec.inserted.boundary[i], rec.removed.outside[i]);
  h.reserve_edge_ids(std::max(g.next_edge_id(), rec.inserted.graph.next_edge_id()));
  return h;
}

inline Multigraph apply_prune(const Multigraph& g, const PruneRecord& rec) {
  auto h = delete_edges(g, rec.removed_edges & g.edge_set());
  return delete_vertices(h, rec.removed_vertices);
}

}  // namespace detail

// Graphs before each step, followed by the reduced graph.
inline std::vector<Multigraph> replay(const ReductionTrace& trace) {
  std::vector<Multigraph> out{trace.source};
  for (const auto& s : trace.steps) {
    if (const auto* r = std::get_if<ReplacementRecord>(&s))
      out.push_back(detail::apply_replacement(out.back(), *r));
    else
      out.push_back(detail::apply_prune(out.back(), std::get<PruneRecord>(s)));
  }
  return out;
}

// Builds G' = (inserted copy of rep) glued to G - X; nullopt when rep is not
// strictly smaller. Fresh ids sit above every id G has used.
inline std::optional<Multigraph> replace_with(const Multigraph& g, const VertexSet& x, const BoundariedGraph& rep, ReductionTrace& trace) {
  auto part = cut_out(g, x);
  if (rep.r() != part.part.r()) throw InputError("representative has a different boundary size");
  if (rep.graph.size() >= part.part.graph.size()) return std::nullopt;
  ReplacementRecord rec;
  rec.removed = part;
  std::map<VertexId, VertexId> vmap;
  std::int32_t nv = g.next_vertex_id();
  for (VertexId v : rep.graph.vertices()) {
    vmap[v] = V(nv++);
    rec.inserted.graph.add_vertex(vmap[v]);
  }
  std::int32_t ne = g.next_edge_id();
  for (const Edge& e : rep.graph.edges()) rec.inserted.graph.add_edge(E(ne++), vmap[e.u], vmap[e.v]);
  rec.inserted.graph.reserve_edge_ids(ne);
  for (VertexId b : rep.boundary) rec.inserted.boundary.push_back(vmap[b]);
  auto h = detail::apply_replacement(g, rec);
  trace.steps.push_back(std::move(rec));
  return h;
}

inline std::optional<Multigraph> replace_protrusion(const Multigraph& g, const VertexSet& x, ReplacementTable& table, ReductionTrace& trace,
                                                    const ProtrusionOptions& opt = {}) {
  if (static_cast<int>(boundary(g, x).size()) > 2 * table.family().bF) throw PreconditionError("not a 2bF-protrusion");
  auto part = cut_out(g, x);
  if (!is_family_free(part.part.graph, table.family())) throw PreconditionError("protrusion is not F-free");
  auto rep = smaller_representative(table, part.part, opt);
  if (!rep) return std::nullopt;
  return replace_with(g, x, *rep, trace);
}

struct ExhaustiveResult {
  Multigraph graph;
  ReductionTrace trace;
  int rounds = 0;
};

inline ExhaustiveResult exhaustive_replacement(const Multigraph& g, ReplacementTable& table, const ProtrusionOptions& opt = {}) {
  ExhaustiveResult out{g, {g, {}}, 0};
  bool again = true;
  while (again) {
    again = false;
    for (const auto& c : components(out.graph)) {
      auto h = induced_subgraph(out.graph, c);
      auto x = find_replaceable_protrusion(h, table, opt);
      if (!x) continue;
      auto next = replace_protrusion(out.graph, *x, table, out.trace, opt);
      if (!next) continue;
      out.graph = std::move(*next);
      ++out.rounds;
      again = true;
      break;
    }
  }
  return out;
}

namespace detail {

inline EdgeSet lift_replacement(const Multigraph& before, const EdgeSet& sol, const ReplacementRecord& rec, ReplacementTable& table) {
  const auto& ins = rec.inserted;
  auto xi = extend(ins);
  std::vector<EdgeId> li;
  for (EdgeId e : sol & ins.graph.edge_set()) li.push_back(e);
  for (std::size_t i = 0; i < rec.removed.glue.size(); ++i)
    if (sol.contains(rec.removed.glue[i])) li.push_back(xi.pendants[i]);
  EdgeSet lprime(li);
  const auto& pairs = table.pairs(ins.r());
  RootedSearch rs(ins, pairs, {});
  PairMask target(static_cast<int>(pairs.size()));
  for (int p = 0; p < static_cast<int>(pairs.size()); ++p)
    if (rs.model(p, lprime)) target.set(p);
  int budget = std::min<int>(static_cast<int>(lprime.size()), ins.r());
  auto l = deletion_matching(rec.removed.part, pairs, target, budget);
  if (!l) throw PreconditionError("solution lifting found no matching deletion set");
  auto xr = extend(rec.removed.part);
  std::vector<EdgeId> out;
  EdgeSet glue(rec.removed.glue);
  for (EdgeId e : sol)
    if (!ins.graph.has_edge(e) && !glue.contains(e)) out.push_back(e);
  for (EdgeId e : *l) {
    auto it = std::find(xr.pendants.begin(), xr.pendants.end(), e);
    out.push_back(it != xr.pendants.end() ? rec.removed.glue[static_cast<std::size_t>(it - xr.pendants.begin())] : e);
  }
  EdgeSet res(out);
  detail::check_edges(before, res);
  return res;
}

inline EdgeSet lift_prune(const Multigraph& before, const EdgeSet& sol, const PruneRecord& rec, const GraphFamily& f) {
  if (is_family_free(delete_edges(before, sol), f)) return sol;
  EdgeSet alt = (sol - rec.guarded) | rec.delta;
  if (alt.size() > sol.size()) throw PreconditionError("bounding record violates its size invariant");
  return alt;
}

}  // namespace detail

// Lifts a solution of the reduced graph back to trace.source, step by step.
inline EdgeSet lift_solution(const EdgeSet& sol, const ReductionTrace& trace, ReplacementTable& table, bool verify = true) {
  auto graphs = replay(trace);
  const auto& f = table.family();
  if (!graphs.back().edge_set().disjoint(sol) || !sol.subset_of(graphs.back().edge_set()))
    detail::check_edges(graphs.back(), sol);
  if (verify && !is_family_free(delete_edges(graphs.back(), sol), f)) throw PreconditionError("not a solution of the reduced graph");
  EdgeSet cur = sol;
  for (std::size_t i = trace.steps.size(); i-- > 0;) {
    const auto& before = graphs[i];
    if (const auto* r = std::get_if<ReplacementRecord>(&trace.steps[i]))
      cur = detail::lift_replacement(before, cur, *r, table);
    else
      cur = detail::lift_prune(before, cur, std::get<PruneRecord>(trace.steps[i]), f);
  }
  if (verify && !is_family_free(delete_edges(trace.source, cur), f)) throw PreconditionError("lifted set is not a solution");
  return cur;
}

}  // namespace imdel
