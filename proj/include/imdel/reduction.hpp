#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "imdel/canon.hpp"
#include "imdel/errors.hpp"
#include "imdel/immersion.hpp"
#include "imdel/multigraph.hpp"
#include "imdel/protrusion.hpp"
#include "imdel/treecut.hpp"

namespace imdel {

struct Theta {
  VertexId u, v;
  EdgeSet edges;
};

struct Bouquet {
  VertexSet attachment;
  std::vector<VertexSet> elements;  // sorted by smallest vertex
};

struct Solution {
  EdgeSet edges;
  bool verified = false;
};

// Maximal parallel classes with at least `threshold` edges.
inline std::vector<Theta> find_thetas(const Multigraph& g, int threshold) {
  std::map<std::pair<VertexId, VertexId>, std::vector<EdgeId>> cls;
  for (const Edge& e : g.edges()) cls[{std::min(e.u, e.v), std::max(e.u, e.v)}].push_back(e.id);
  std::vector<Theta> out;
  for (auto& [uv, es] : cls)
    if (static_cast<int>(es.size()) >= threshold) out.push_back({uv.first, uv.second, EdgeSet(es)});
  return out;
}

namespace detail {

// Isomorphism type of G[U + C] with every vertex of U fixed.
inline std::vector<int> element_code(const Multigraph& g, const VertexSet& u, const VertexSet& c) {
  auto h = induced_subgraph(g, u | c);
  std::vector<int> color(h.order(), 0);
  for (std::size_t i = 0; i < u.size(); ++i) color[static_cast<std::size_t>(h.pos(u[i]))] = static_cast<int>(i) + 1;
  return canonical_form(colored(h, color)).code;
}

}  // namespace detail

// Attachments U with |U| <= 2 and at least `threshold` pairwise isomorphic
// elements: components C of G - U with N(C) = U, |delta(C)| <= 2, G[C]
// F-free and at most `max_element_edges` edges.
inline std::vector<Bouquet> find_bouquets(const Multigraph& g, const GraphFamily& f, int threshold, int max_element_edges) {
  std::vector<Bouquet> out;
  std::vector<VertexId> vs(g.vertices().begin(), g.vertices().end());
  auto scan = [&](const VertexSet& u) {
    std::map<std::vector<int>, std::vector<VertexSet>> groups;
    for (const auto& c : components(delete_vertices(g, u))) {
      if (static_cast<int>(boundary(g, c).size()) > 2) continue;
      if (neighbourhood(g, c) != u) continue;
      auto gc = induced_subgraph(g, c);
      if (static_cast<int>(gc.size()) > max_element_edges || !is_family_free(gc, f)) continue;
      groups[detail::element_code(g, u, c)].push_back(c);
    }
    for (auto& [code, els] : groups) {
      if (static_cast<int>(els.size()) < threshold) continue;
      std::sort(els.begin(), els.end(), [](const VertexSet& a, const VertexSet& b) { return a.front() < b.front(); });
      out.push_back({u, std::move(els)});
    }
  };
  for (std::size_t i = 0; i < vs.size(); ++i) {
    scan(VertexSet{vs[i]});
    for (std::size_t j = i + 1; j < vs.size(); ++j) scan(VertexSet{vs[i], vs[j]});
  }
  return out;
}

inline EdgeSet edges_of(const Multigraph& g, const VertexSet& x) { return induced_subgraph(g, x).edge_set(); }

inline EdgeSet structure_edges(const Multigraph& g, const Bouquet& b) {
  EdgeSet out;
  for (const auto& s : b.elements) out = out | edges_of(g, s) | boundary(g, s);
  return out;
}

// Pairwise edge-disjointness of detected structures, and attachments that
// avoid every bouquet element.
inline bool structures_disjoint(const Multigraph& g, const std::vector<Theta>& thetas, const std::vector<Bouquet>& bouquets) {
  std::vector<EdgeSet> sets;
  for (const auto& t : thetas) sets.push_back(t.edges);
  for (const auto& b : bouquets) sets.push_back(structure_edges(g, b));
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = i + 1; j < sets.size(); ++j)
      if (!sets[i].disjoint(sets[j])) return false;
  for (const auto& b : bouquets)
    for (const auto& other : bouquets)
      for (const auto& s : other.elements)
        if (!b.attachment.disjoint(s)) return false;
  return true;
}

// Largest element size of a bouquet in a graph without excessive protrusions.
inline int bouquet_element_cap(const ReplacementTable& t) { return 2 * t.family().bF * t.cF(); }

// Delta of the pruning step: keep dF - 1 edges per theta, then dF - 1
// elements per bouquet of the pruned graph, and take all remaining edges.
inline EdgeSet prune_structures(const Multigraph& g, ReplacementTable& table) {
  const auto& f = table.family();
  if (!is_connected(g)) throw PreconditionError("prune_structures needs a connected graph");
  if (is_family_free(g, f)) throw PreconditionError("prune_structures needs a graph that is not F-free");
  int d = table.dF();
  std::vector<EdgeId> drop;
  for (const auto& th : find_thetas(g, d))
    for (std::size_t i = static_cast<std::size_t>(d - 1); i < th.edges.size(); ++i) drop.push_back(th.edges[i]);
  auto h = delete_edges(g, EdgeSet(drop));
  std::vector<VertexId> gone;
  for (const auto& b : find_bouquets(h, f, d, bouquet_element_cap(table)))
    for (std::size_t i = static_cast<std::size_t>(d - 1); i < b.elements.size(); ++i)
      for (VertexId v : b.elements[i]) gone.push_back(v);
  auto core = delete_vertices(h, VertexSet(gone));
  // The argument guarantees a non-free core; fall back to all edges if not.
  if (core.size() == 0 || is_family_free(core, f)) return g.edge_set();
  return core.edge_set();
}

namespace detail {

// Union of the components of G - delta that meet `where`.
inline VertexSet isolated_side(const Multigraph& g, const EdgeSet& delta, const VertexSet& where) {
  auto h = delete_edges(g, delta & g.edge_set());
  std::vector<VertexId> out;
  for (const auto& c : components(h))
    if (!c.disjoint(where)) out.insert(out.end(), c.begin(), c.end());
  return VertexSet(out);
}

inline std::optional<VertexId> offending_component(const Multigraph& g, const EdgeSet& delta, const VertexSet& where, const GraphFamily& f) {
  auto h = delete_edges(g, delta & g.edge_set());
  for (const auto& c : components(h))
    if (!c.disjoint(where) && !is_family_free(induced_subgraph(h, c), f)) return c.front();
  return std::nullopt;
}

inline PruneRecord make_record(const Multigraph& g, std::string rule, VertexSet vs, EdgeSet es, const EdgeSet& delta, const VertexSet& where) {
  PruneRecord r;
  r.rule = std::move(rule);
  for (VertexId v : vs)
    for (int ep : g.incident(v)) es.insert(g.edge_at(ep).id);
  r.removed_vertices = std::move(vs);
  r.removed_edges = std::move(es);
  r.delta = delta & g.edge_set();
  auto side = isolated_side(g, delta, where);
  std::vector<EdgeId> guarded;
  for (const Edge& e : g.edges())
    if (side.contains(e.u) || side.contains(e.v)) guarded.push_back(e.id);
  r.guarded = EdgeSet(guarded);
  return r;
}

}  // namespace detail

// Keeps dF + |delta| edges of the theta, dropping the surplus with the
// largest ids outside delta. Needs every component of G - delta meeting
// {u, v} to be F-free.
inline Multigraph bound_theta(const Multigraph& g, const Theta& th, const EdgeSet& delta, ReplacementTable& table, ReductionTrace* trace = nullptr) {
  auto keep = static_cast<std::size_t>(table.dF()) + delta.size();
  if (th.edges.size() <= keep) return g;
  VertexSet ends{th.u, th.v};
  if (auto bad = detail::offending_component(g, delta, ends, table.family()))
    throw PreconditionError("component of vertex " + std::to_string(bad->value) + " in G - delta is not F-free");
  std::vector<EdgeId> order;
  for (EdgeId e : th.edges)
    if (delta.contains(e)) order.push_back(e);
  for (EdgeId e : th.edges)
    if (!delta.contains(e)) order.push_back(e);
  EdgeSet drop(std::vector<EdgeId>(order.begin() + static_cast<std::ptrdiff_t>(keep), order.end()));
  auto rec = detail::make_record(g, "theta", {}, drop, delta, ends);
  if (trace) trace->steps.push_back(rec);
  return delete_edges(g, drop);
}

// Keeps dF + |delta| elements, preferring those that touch delta; the rest
// lose their vertices.
inline Multigraph bound_bouquet(const Multigraph& g, const Bouquet& b, const EdgeSet& delta, ReplacementTable& table, ReductionTrace* trace = nullptr) {
  auto keep = static_cast<std::size_t>(table.dF()) + delta.size();
  if (b.elements.size() <= keep) return g;
  VertexSet where = b.attachment;
  for (const auto& s : b.elements) where = where | s;
  if (auto bad = detail::offending_component(g, delta, where, table.family()))
    throw PreconditionError("component of vertex " + std::to_string(bad->value) + " in G - delta is not F-free");
  std::vector<const VertexSet*> order;
  auto touches = [&](const VertexSet& s) { return !(edges_of(g, s) | boundary(g, s)).disjoint(delta); };
  for (const auto& s : b.elements)
    if (touches(s)) order.push_back(&s);
  for (const auto& s : b.elements)
    if (!touches(s)) order.push_back(&s);
  std::vector<VertexId> gone;
  for (std::size_t i = keep; i < order.size(); ++i) gone.insert(gone.end(), order[i]->begin(), order[i]->end());
  VertexSet vs(gone);
  auto rec = detail::make_record(g, "bouquet", vs, {}, delta, where);
  if (trace) trace->steps.push_back(rec);
  return delete_vertices(g, vs);
}

// Approximate solution; every loop replaces protrusions exhaustively, takes
// the pruning Delta of each non-free component, and lifts back at the end.
inline Solution approximate(const Multigraph& g, ReplacementTable& table, const ProtrusionOptions& opt = {}) {
  const auto& f = table.family();
  std::vector<std::pair<ReductionTrace, EdgeSet>> steps;
  Multigraph cur = g;
  while (!is_family_free(cur, f)) {
    auto ex = exhaustive_replacement(cur, table, opt);
    std::vector<EdgeId> delta;
    for (const auto& c : components(ex.graph)) {
      auto h = induced_subgraph(ex.graph, c);
      if (is_family_free(h, f)) continue;
      for (EdgeId e : prune_structures(h, table)) delta.push_back(e);
    }
    EdgeSet d(delta);
    cur = delete_edges(ex.graph, d);
    steps.push_back({std::move(ex.trace), d});
  }
  EdgeSet sol;
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) sol = lift_solution(sol | it->second, it->first, table);
  Solution out{sol, is_family_free(delete_edges(g, sol), f)};
  if (!out.verified) throw PreconditionError("approximation produced an invalid solution");
  return out;
}

struct ReducedGraph {
  Multigraph graph;
  PruneRecord record;
};

namespace detail {

// Candidate deletion sets: for each node t of the lca-closed set M, the
// F-edges at X_t plus the adhesions towards branches holding other M nodes;
// and F_apx itself.
inline std::vector<EdgeSet> isolating_sets(const Multigraph& g, const EdgeSet& fapx, const GraphFamily& f) {
  std::vector<EdgeSet> out{fapx};
  auto rest = delete_edges(g, fapx);
  TreeCutDecomposition d;
  try {
    d = neat_decomposition(rest, f, nullptr, false);
  } catch (const ConfigError&) {
    return out;  // no certified width bound: only F_apx itself
  }
  Layout L(rest, d);
  std::vector<int> m0;
  for (EdgeId e : fapx) {
    const Edge& ed = g.edge(e);
    m0.push_back(L.owner[static_cast<std::size_t>(rest.pos(ed.u))]);
    m0.push_back(L.owner[static_cast<std::size_t>(rest.pos(ed.v))]);
  }
  auto m = lca_closure(d, m0);
  std::vector<char> in_m(static_cast<std::size_t>(d.nodes()), 0);
  for (int t : m) in_m[static_cast<std::size_t>(t)] = 1;
  for (int t : m) {
    std::vector<EdgeId> delta;
    const auto& bag = d.bags[static_cast<std::size_t>(t)];
    for (EdgeId e : fapx) {
      const Edge& ed = g.edge(e);
      if (bag.contains(ed.u) || bag.contains(ed.v)) delta.push_back(e);
    }
    for (int s : L.neighbours(t)) {
      bool holds_m = false;
      for (int x : m)
        if (x != t && L.root[static_cast<std::size_t>(x)] == L.root[static_cast<std::size_t>(t)] && L.branch(t, x) == s) holds_m = true;
      if (!holds_m) continue;
      for (int ep : L.adh[static_cast<std::size_t>(L.parent[static_cast<std::size_t>(s)] == t ? s : t)]) delta.push_back(rest.edge_at(ep).id);
    }
    out.push_back(EdgeSet(delta));
  }
  std::sort(out.begin(), out.end(), [](const EdgeSet& a, const EdgeSet& b) { return a.size() != b.size() ? a.size() < b.size() : a < b; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

// A strictly smaller OPT-equal subgraph, or nullopt when ||G|| <= c |F_apx|
// or no structure exceeds its bound.
inline std::optional<ReducedGraph> reduce_from_approx(const Multigraph& g, const EdgeSet& fapx, ReplacementTable& table, double c) {
  const auto& f = table.family();
  if (!is_connected(g)) throw PreconditionError("reduce_from_approx needs a connected graph");
  detail::check_edges(g, fapx);
  if (!is_family_free(delete_edges(g, fapx), f)) throw PreconditionError("G - F_apx is not F-free");
  if (fapx.empty()) {
    if (g.size() == 0) return std::nullopt;
    auto rec = detail::make_record(g, "free", {}, g.edge_set(), {}, {});
    return ReducedGraph{delete_edges(g, g.edge_set()), rec};
  }
  if (static_cast<double>(g.size()) <= c * static_cast<double>(fapx.size())) return std::nullopt;
  int d = table.dF();
  auto thetas = find_thetas(g, d + 1);
  auto bouquets = find_bouquets(g, f, d + 1, bouquet_element_cap(table));
  if (thetas.empty() && bouquets.empty()) return std::nullopt;
  auto deltas = detail::isolating_sets(g, fapx, f);
  for (const auto& th : thetas)
    for (const auto& delta : deltas) {
      if (th.edges.size() <= static_cast<std::size_t>(d) + delta.size()) break;
      if (detail::offending_component(g, delta, {th.u, th.v}, f)) continue;
      ReductionTrace tr{g, {}};
      auto h = bound_theta(g, th, delta, table, &tr);
      return ReducedGraph{h, std::get<PruneRecord>(tr.steps.back())};
    }
  for (const auto& b : bouquets)
    for (const auto& delta : deltas) {
      if (b.elements.size() <= static_cast<std::size_t>(d) + delta.size()) break;
      VertexSet where = b.attachment;
      for (const auto& s : b.elements) where = where | s;
      if (detail::offending_component(g, delta, where, f)) continue;
      ReductionTrace tr{g, {}};
      auto h = bound_bouquet(g, b, delta, table, &tr);
      return ReducedGraph{h, std::get<PruneRecord>(tr.steps.back())};
    }
  return std::nullopt;
}

struct KernelStats {
  int iterations = 0;
  std::size_t replacements = 0;
  std::size_t prunings = 0;
  std::size_t approx_size = 0;
  bool stalled = false;  // no component could be reduced although above c_ker k
};

struct KernelResult {
  bool no_instance = false;
  Multigraph graph;
  ReductionTrace trace;
  KernelStats stats;
};

inline KernelResult kernelize(const Multigraph& g, int k, ReplacementTable& table, const ProtrusionOptions& opt = {}) {
  if (k < 0) throw InputError("k must be non-negative");
  const auto& f = table.family();
  double c = f.c_apx > 0 ? f.c_ker / f.c_apx : f.c_ker;
  KernelResult out{false, g, {g, {}}, {}};
  for (std::size_t guard = 0; guard <= g.size() + 1; ++guard) {
    ++out.stats.iterations;
    auto ex = exhaustive_replacement(out.graph, table, opt);
    for (auto& s : ex.trace.steps) out.trace.steps.push_back(std::move(s));
    out.graph = std::move(ex.graph);
    if (static_cast<double>(out.graph.size()) <= f.c_ker * k) break;
    auto apx = approximate(out.graph, table, opt);
    out.stats.approx_size = apx.edges.size();
    if (static_cast<double>(apx.edges.size()) > f.c_apx * k) {
      out.no_instance = true;
      break;
    }
    // Components by decreasing ||H|| / |F_H|; free ones first.
    std::vector<std::pair<double, VertexSet>> order;
    for (const auto& comp : components(out.graph)) {
      auto h = induced_subgraph(out.graph, comp);
      auto fh = apx.edges & h.edge_set();
      if (h.size() == 0) continue;
      if (fh.empty() || static_cast<double>(h.size()) > c * static_cast<double>(fh.size()))
        order.push_back({fh.empty() ? 1e18 : static_cast<double>(h.size()) / static_cast<double>(fh.size()), comp});
    }
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    bool progress = false;
    for (const auto& [ratio, comp] : order) {
      auto h = induced_subgraph(out.graph, comp);
      auto red = reduce_from_approx(h, apx.edges & h.edge_set(), table, c);
      if (!red) continue;
      out.graph = detail::apply_prune(out.graph, red->record);
      out.trace.steps.push_back(red->record);
      progress = true;
      break;
    }
    if (!progress) {
      out.stats.stalled = true;
      break;
    }
  }
  out.stats.replacements = out.trace.replacements();
  out.stats.prunings = out.trace.prunings();
  return out;
}

// Exact OPT by iterative deepening, summed over components; theta2 uses the
// cycle rank directly.
struct OracleGuard {
  int max_edges = 25;
  int max_answer = 8;
};

namespace detail {

inline bool is_theta2_family(const GraphFamily& f) {
  if (f.members.size() != 1) return false;
  const auto& h = f.members.front();
  return h.order() == 2 && h.size() == 2;
}

inline std::optional<EdgeSet> search_solution(const Multigraph& g, const GraphFamily& f, int k) {
  std::vector<EdgeId> ids = g.edge_set().items();
  int m = static_cast<int>(ids.size());
  std::vector<EdgeId> pick;
  std::optional<EdgeSet> hit;
  auto rec = [&](auto&& self, int from, int left) -> void {
    if (hit) return;
    if (left == 0) {
      EdgeSet s(pick);
      if (is_family_free(delete_edges(g, s), f)) hit = s;
      return;
    }
    for (int i = from; i + left <= m && !hit; ++i) {
      pick.push_back(ids[static_cast<std::size_t>(i)]);
      self(self, i + 1, left - 1);
      pick.pop_back();
    }
  };
  rec(rec, 0, k);
  return hit;
}

}  // namespace detail

// A minimum deletion set: the non-forest edges for theta2, otherwise
// per-component iterative deepening under the guard.
inline EdgeSet optimal_solution(const Multigraph& g, const GraphFamily& f, OracleGuard guard = {}) {
  std::vector<EdgeId> out;
  if (detail::is_theta2_family(f)) {
    std::vector<int> parent(g.order());
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](int x) {
      while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      return x;
    };
    for (const Edge& e : g.edges()) {
      int a = root(g.pos(e.u)), b = root(g.pos(e.v));
      if (a == b) {
        out.push_back(e.id);
      } else {
        parent[static_cast<std::size_t>(a)] = b;
      }
    }
    return EdgeSet(out);
  }
  if (static_cast<int>(g.size()) > guard.max_edges) throw ResourceError("oracle guard: graph has more than " + std::to_string(guard.max_edges) + " edges");
  for (const auto& c : components(g)) {
    auto h = induced_subgraph(g, c);
    for (int k = 0;; ++k) {
      if (k > guard.max_answer) throw ResourceError("oracle guard: optimum above " + std::to_string(guard.max_answer));
      if (auto hit = detail::search_solution(h, f, k)) {
        out.insert(out.end(), hit->begin(), hit->end());
        break;
      }
    }
  }
  return EdgeSet(out);
}

inline int opt_bruteforce(const Multigraph& g, const GraphFamily& f, OracleGuard guard = {}) {
  if (detail::is_theta2_family(f)) {
    int c = 0;
    component_labels(g, &c);
    return static_cast<int>(g.size()) - static_cast<int>(g.order()) + c;
  }
  if (static_cast<int>(g.size()) > guard.max_edges) throw ResourceError("oracle guard: graph has more than " + std::to_string(guard.max_edges) + " edges");
  int total = 0;
  for (const auto& c : components(g)) {
    auto h = induced_subgraph(g, c);
    int k = 0;
    while (!detail::search_solution(h, f, k)) {
      if (++k > guard.max_answer) throw ResourceError("oracle guard: optimum above " + std::to_string(guard.max_answer));
    }
    total += k;
  }
  return total;
}

struct SolveResult {
  std::optional<Solution> solution;
  KernelResult kernel;
};

// Kernelize, try every edge subset of size <= k of the kernel, lift, verify.
inline SolveResult solve_fpt(const Multigraph& g, int k, ReplacementTable& table, const ProtrusionOptions& opt = {}, double budget = 5e6) {
  const auto& f = table.family();
  SolveResult out{std::nullopt, kernelize(g, k, table, opt)};
  if (out.kernel.no_instance) return out;
  const auto& h = out.kernel.graph;
  double work = 0, choose = 1;
  for (int s = 0; s <= k && s <= static_cast<int>(h.size()); ++s) {
    if (s > 0) choose = choose * static_cast<double>(static_cast<int>(h.size()) - s + 1) / s;
    work += choose;
  }
  if (work > budget) throw ResourceError("search guard: " + std::to_string(static_cast<long long>(work)) + " subsets");
  for (int s = 0; s <= k && s <= static_cast<int>(h.size()); ++s) {
    if (auto hit = detail::search_solution(h, f, s)) {
      auto lifted = lift_solution(*hit, out.kernel.trace, table);
      out.solution = Solution{lifted, is_family_free(delete_edges(g, lifted), f)};
      if (!out.solution->verified) throw PreconditionError("lifted solution does not verify");
      break;
    }
  }
  return out;
}

}  // namespace imdel
