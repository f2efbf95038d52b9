#include <gtest/gtest.h>

#include <random>

#include "imdel/families.hpp"
#include "imdel/protrusion.hpp"
#include "oracles.hpp"

using namespace imdel;

namespace {

// Rooted-immersion test straight from the definition: pattern vertices
// pinned to the copies of their boundary index, rest injective anywhere.
bool rooted_oracle(const RelevantPair& p, const ExtendedGraph& x) {
  std::vector<int> pins(p.pattern.order(), -1);
  for (auto [v, i] : p.phi) pins[static_cast<std::size_t>(p.pattern.pos(v))] = x.graph.pos(x.copies[static_cast<std::size_t>(i)]);
  return oracle::immerses(p.pattern, x.graph, pins);
}

// value(S) for every S, by trying every deletion set of at most r edges.
std::map<std::uint32_t, int> signature_oracle(const BoundariedGraph& b, const std::vector<RelevantPair>& pairs) {
  auto x = extend(b);
  int m = static_cast<int>(x.graph.size()), np = static_cast<int>(pairs.size()), r = b.r();
  std::vector<std::pair<int, std::uint32_t>> alive;  // (|L|, pairs still rooted)
  for (std::uint32_t l = 0; l < (1u << m); ++l) {
    int size = std::popcount(l);
    if (size > r) continue;
    std::vector<EdgeId> del;
    for (int e = 0; e < m; ++e)
      if ((l >> e) & 1u) del.push_back(x.graph.edge_at(e).id);
    ExtendedGraph y = x;
    y.graph = delete_edges(x.graph, EdgeSet(del));
    std::uint32_t a = 0;
    for (int p = 0; p < np; ++p)
      if (rooted_oracle(pairs[static_cast<std::size_t>(p)], y)) a |= 1u << p;
    alive.push_back({size, a});
  }
  std::map<std::uint32_t, int> out;
  for (std::uint32_t s = 0; s < (1u << np); ++s) {
    int best = r;
    for (auto [size, a] : alive)
      if (!(a & s)) best = std::min(best, size);
    out[s] = best;
  }
  return out;
}

PairMask mask_of(int n, std::uint32_t bits) {
  PairMask m(n);
  for (int i = 0; i < n; ++i)
    if ((bits >> i) & 1u) m.set(i);
  return m;
}

// Random F-free r-boundaried graph on n vertices, with at most m edges.
BoundariedGraph random_boundaried(std::mt19937_64& rng, const GraphFamily& f, int n, int m, int r) {
  for (int tries = 0;; ++tries) {
    auto g = oracle::random_multigraph(rng, n, m);
    if (!is_family_free(g, f)) {
      if (tries % 8 == 7 && m > 0) --m;
      continue;
    }
    BoundariedGraph b{g, {}};
    for (int i = 0; i < r; ++i) b.boundary.push_back(V(static_cast<int>(rng() % static_cast<std::uint64_t>(n))));
    return b;
  }
}

int opt_of(const Multigraph& g, const GraphFamily& f) {
  if (f.name == "theta2") return oracle::cycle_rank(g);
  return oracle::opt(g, [&](const Multigraph& h) { return oracle::free_of(h, f.members); });
}

// OPT(G1 + H) == OPT(G2 + H) for `hosts` random r-boundaried hosts.
bool equivalent_over_hosts(const BoundariedGraph& g1, const BoundariedGraph& g2, const GraphFamily& f, std::mt19937_64& rng, int hosts,
                           int max_host_edges = 8) {
  for (int i = 0; i < hosts; ++i) {
    int n = 1 + static_cast<int>(rng() % 4);
    int budget = std::max(0, max_host_edges - g1.r());
    auto h = oracle::random_multigraph(rng, n, n < 2 ? 0 : static_cast<int>(rng() % static_cast<std::uint64_t>(budget + 1)));
    BoundariedGraph hb{h, {}};
    for (int j = 0; j < g1.r(); ++j) hb.boundary.push_back(V(static_cast<int>(rng() % static_cast<std::uint64_t>(n))));
    if (opt_of(glue(g1, hb).graph, f) != opt_of(glue(g2, hb).graph, f)) return false;
  }
  return true;
}

Multigraph path_graph(int n) {
  Multigraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(V(i));
  for (int i = 0; i + 1 < n; ++i) g.add_edge(V(i), V(i + 1));
  return g;
}

ReplacementTable& theta2_table() {
  static ReplacementTable t = default_table(builtin_family("theta2"));
  return t;
}

ReplacementTable& theta3_table() {
  static ReplacementTable t = default_table(builtin_family("theta3"));
  return t;
}

}  // namespace

TEST(Signature, PendantEdgePatternNeedsOneDeletion) {
  auto f = builtin_family("theta2");
  BoundariedGraph b{make_graph(1, {}), {V(0)}};
  auto pairs = enumerate_relevant_pairs(1, f);
  int idx = -1;
  for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
    const auto& p = pairs[static_cast<std::size_t>(i)];
    if (p.pattern.order() == 2 && p.pattern.size() == 1 && p.phi.size() == 1) idx = i;
  }
  ASSERT_GE(idx, 0);
  // Keep the search tiny: this pair alone.
  std::vector<RelevantPair> one{pairs[static_cast<std::size_t>(idx)]};
  auto s = compute_signature(b, one);
  EXPECT_EQ(s.value(mask_of(1, 1)), 1);
  EXPECT_EQ(s.value(mask_of(1, 0)), 0);
}

TEST(Signature, RejectsGraphsThatAreNotFree) {
  auto f = builtin_family("theta2");
  BoundariedGraph b{make_graph(2, {{0, 1}, {0, 1}}), {V(0)}};
  EXPECT_THROW(compute_signature(b, f), PreconditionError);
  BoundariedGraph wide{make_graph(1, {}), {V(0), V(0), V(0)}};
  EXPECT_THROW(compute_signature(wide, f), PreconditionError);
}

TEST(Signature, MatchesDeletionBruteForce) {
  std::mt19937_64 rng(5);
  for (auto [name, r] : std::vector<std::pair<std::string, int>>{{"theta2", 1}, {"theta2", 2}, {"theta3", 2}, {"theta3", 3}}) {
    auto f = builtin_family(name);
    auto pairs = enumerate_realizable_pairs(r, f);
    for (int it = 0; it < 12; ++it) {
      int n = 1 + static_cast<int>(rng() % 4);
      auto b = random_boundaried(rng, f, n, n < 2 ? 0 : static_cast<int>(rng() % 5), r);
      auto s = compute_signature(b, pairs);
      EXPECT_EQ(s.values(), signature_oracle(b, pairs)) << name << " r=" << r << " it=" << it;
    }
  }
}

TEST(SignatureProperties, MonotoneAndBoundedByR) {
  std::mt19937_64 rng(6);
  auto f = builtin_family("theta3");
  for (int r = 0; r <= 4; ++r) {
    auto pairs = enumerate_realizable_pairs(r, f);
    int np = static_cast<int>(pairs.size());
    for (int it = 0; it < 6; ++it) {
      auto b = random_boundaried(rng, f, 5, 7, r);
      auto s = compute_signature(b, pairs);
      EXPECT_EQ(s.value(PairMask(np)), 0);
      for (int q = 0; q < 40; ++q) {
        PairMask small(np), big(np);
        for (int i = 0; i < np; ++i) {
          auto roll = rng() % 3;
          if (roll == 0) small.set(i);
          if (roll != 2) big.set(i);
        }
        int vs = s.value(small), vb = s.value(big);
        EXPECT_LE(vs, vb);
        EXPECT_LE(vb, r);
        EXPECT_GE(vs, 0);
      }
    }
  }
}

TEST(Equivalence, IdenticalGraphsAgree) {
  std::mt19937_64 rng(8);
  auto f = builtin_family("theta2");
  auto b = random_boundaried(rng, f, 3, 2, 2);
  EXPECT_TRUE(equivalent_over_hosts(b, b, f, rng, 10));
}

TEST(Equivalence, IsolatedVertexVersusPendantEdge) {
  std::mt19937_64 rng(9);
  auto f = builtin_family("theta2");
  BoundariedGraph lone{make_graph(1, {}), {V(0)}};
  BoundariedGraph pendant{make_graph(2, {{0, 1}}), {V(0)}};
  auto& t = theta2_table();
  bool same = t.signature(lone) == t.signature(pendant);
  EXPECT_TRUE(same);
  EXPECT_EQ(equivalent_over_hosts(lone, pendant, f, rng, 40), same);
}

TEST(Equivalence, TwoBoundaryEdgeVersusPath) {
  // r=2: one edge between the boundary vertices carries a cycle through the
  // host, a disconnected pair does not.
  std::mt19937_64 rng(10);
  auto f = builtin_family("theta2");
  auto& t = theta2_table();
  BoundariedGraph edge{make_graph(2, {{0, 1}}), {V(0), V(1)}};
  BoundariedGraph path{make_graph(3, {{0, 1}, {1, 2}}), {V(0), V(2)}};
  BoundariedGraph apart{make_graph(2, {}), {V(0), V(1)}};
  EXPECT_EQ(t.signature(edge), t.signature(path));
  EXPECT_NE(t.signature(edge), t.signature(apart));
  EXPECT_TRUE(equivalent_over_hosts(edge, path, f, rng, 30));
  EXPECT_FALSE(equivalent_over_hosts(edge, apart, f, rng, 60));
}

TEST(EquivalenceProperties, SameSignatureMeansSameOptimum) {
  std::mt19937_64 rng(11);
  for (std::string name : {"theta2", "theta3"}) {
    auto f = builtin_family(name);
    auto& t = name == "theta2" ? theta2_table() : theta3_table();
    for (int it = 0; it < 25; ++it) {
      int r = static_cast<int>(rng() % (name == "theta2" ? 3 : 4));
      int n = 1 + static_cast<int>(rng() % 4);
      auto b = random_boundaried(rng, f, n, n < 2 ? 0 : static_cast<int>(rng() % 5), r);
      const auto* list = t.lookup(t.signature(b));
      if (!list) continue;
      EXPECT_TRUE(equivalent_over_hosts(list->front().graph, b, f, rng, 10, 6)) << name << " it=" << it;
    }
  }
}

TEST(Table, BudgetZeroHoldsOnlyEdgelessGraphs) {
  ReplacementTable t(builtin_family("theta3"));
  for (int r = 0; r <= 4; ++r) extend_table(t, r, 0);
  ASSERT_GT(t.size(), 0u);
  for (const auto& [k, list] : t.entries())
    for (const auto& e : list) EXPECT_EQ(e.graph.graph.size(), 0u);
}

TEST(Table, EntriesMatchTheirKeys) {
  auto f = builtin_family("theta2");
  ReplacementTable t(f);
  extend_table(t, 1, 3);
  extend_table(t, 2, 3);
  ASSERT_GT(t.size(), 0u);
  for (const auto& [k, list] : t.entries())
    for (const auto& e : list) {
      EXPECT_TRUE(is_family_free(e.graph.graph, f));
      EXPECT_EQ(compute_signature(e.graph, f).key(), k);
      EXPECT_EQ(e.provenance, Provenance::enumerated);
    }
}

TEST(Table, GrowingBudgetIsMonotoneAndIdempotent) {
  ReplacementTable t(builtin_family("theta3"));
  extend_table(t, 3, 1);
  auto before = t.entries();
  extend_table(t, 3, 2);
  for (const auto& [k, list] : before) {
    ASSERT_TRUE(t.entries().count(k));
    EXPECT_LE(detail::weight(t.entries().at(k).front().graph), detail::weight(list.front().graph));
  }
  auto grown = t.entries().size();
  extend_table(t, 3, 2);
  EXPECT_EQ(t.entries().size(), grown);
}

TEST(Table, ImmersionModeKeepsIncomparableRepresentatives) {
  ReplacementTable t(builtin_family("theta2"), true);
  extend_table(t, 2, 3);
  for (const auto& [k, list] : t.entries())
    for (std::size_t i = 0; i < list.size(); ++i)
      for (std::size_t j = 0; j < list.size(); ++j) {
        if (i != j) {
          EXPECT_FALSE(detail::rooted_immersion_of(list[i].graph, list[j].graph));
        }
      }
}

TEST(Protrusion, SmallGraphsHaveNone) {
  auto& t = theta3_table();
  // ||G|| <= 2 bF cF: nothing excessive can exist.
  EXPECT_FALSE(find_replaceable_protrusion(path_graph(4), t));
  EXPECT_THROW(find_replaceable_protrusion(make_graph(2, {}), t), PreconditionError);
}

namespace {

// Two vertices joined by five parallel edges, a long path hanging off vertex 0
// by its first vertex, and its last vertex tied back to vertex 1.
Multigraph core_with_path(int len, bool close) {
  auto g = make_graph(2, {{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}});
  for (int i = 0; i < len; ++i) g.add_vertex(V(2 + i));
  g.add_edge(V(0), V(2));
  for (int i = 0; i + 1 < len; ++i) g.add_edge(V(2 + i), V(3 + i));
  if (close) g.add_edge(V(1 + len), V(1));
  return g;
}

void expect_protrusion(const Multigraph& g, const VertexSet& x, ReplacementTable& t) {
  EXPECT_LE(static_cast<int>(boundary(g, x).size()), 2 * t.family().bF);
  EXPECT_TRUE(is_family_free(induced_subgraph(g, x), t.family()));
  EXPECT_GT(static_cast<int>(induced_subgraph(g, x).size()), t.cF());
}

}  // namespace

TEST(Protrusion, LongPathGluedToCore) {
  auto& t = theta3_table();
  // The splitter route is far costlier, so it gets the shorter path.
  for (auto [route, len] : {std::pair{ProtrusionOptions::Route::boundary_enumeration, 14}, std::pair{ProtrusionOptions::Route::splitter, 8}}) {
    auto g = core_with_path(len, true);
    ProtrusionOptions opt;
    opt.route = route;
    auto x = find_replaceable_protrusion(g, t, opt);
    ASSERT_TRUE(x);
    expect_protrusion(g, *x, t);
    int on_path = 0;
    for (VertexId v : *x) on_path += v.value >= 2;
    EXPECT_GT(2 * on_path, len);
  }
}

TEST(ProtrusionProperties, ReturnedSetsAreProtrusions) {
  std::mt19937_64 rng(12);
  auto& t = theta3_table();
  for (int it = 0; it < 25; ++it) {
    auto g = oracle::random_connected(rng, 6 + static_cast<int>(rng() % 5), 10 + static_cast<int>(rng() % 6));
    if (auto x = find_replaceable_protrusion(g, t)) expect_protrusion(g, *x, t);
  }
}

TEST(Protrusion, ExcessiveSearchHasNoSizeShortcut) {
  auto& t = theta3_table();
  auto g = path_graph(4);
  ASSERT_FALSE(find_replaceable_protrusion(g, t));
  auto x = find_excessive_protrusion(g, t);
  ASSERT_TRUE(x);
  expect_protrusion(g, *x, t);
  EXPECT_FALSE(find_excessive_protrusion(make_graph(2, {{0, 1}, {0, 1}, {0, 1}}), t));
}

TEST(Replacement, SameSizeIsRefused) {
  auto g = path_graph(4);
  ReductionTrace trace{g, {}};
  BoundariedGraph rep{make_graph(3, {{0, 1}, {1, 2}}), {V(0)}};
  EXPECT_FALSE(replace_with(g, VertexSet{V(1), V(2), V(3)}, rep, trace));
  EXPECT_TRUE(trace.steps.empty());
}

TEST(Replacement, CollapsesToSingleVertex) {
  auto& t = theta2_table();
  // A triangle with a pendant path of four edges: the path is a protrusion.
  auto g = make_graph(7, {{0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 5}, {5, 6}});
  VertexSet x{V(3), V(4), V(5), V(6)};
  ReductionTrace trace{g, {}};
  auto h = replace_protrusion(g, x, t, trace);
  ASSERT_TRUE(h);
  EXPECT_LT(h->size(), g.size());
  EXPECT_EQ(h->order(), 4u);
  EXPECT_EQ(oracle::cycle_rank(*h), oracle::cycle_rank(g));
  EXPECT_EQ(replay(trace).back(), *h);
}

TEST(ReplacementProperties, PreservesOptimum) {
  std::mt19937_64 rng(13);
  for (std::string name : {"theta2", "theta3"}) {
    auto f = builtin_family(name);
    auto& t = name == "theta2" ? theta2_table() : theta3_table();
    int done = 0;
    for (int it = 0; it < 60 && done < 15; ++it) {
      int n = 5 + static_cast<int>(rng() % 5);
      auto g = oracle::random_connected(rng, n, n + static_cast<int>(rng() % 6));
      if (g.size() > 14) continue;
      auto x = find_replaceable_protrusion(g, t);
      if (!x) continue;
      ReductionTrace trace{g, {}};
      auto h = replace_protrusion(g, *x, t, trace);
      ASSERT_TRUE(h);
      ++done;
      EXPECT_LT(h->size(), g.size());
      EXPECT_EQ(opt_of(*h, f), opt_of(g, f)) << name << " it=" << it;
    }
  }
}

TEST(Lifting, EmptyTraceIsIdentity) {
  auto& t = theta2_table();
  auto g = make_graph(3, {{0, 1}, {1, 2}, {2, 0}});
  ReductionTrace trace{g, {}};
  EXPECT_EQ(lift_solution({E(1)}, trace, t), (EdgeSet{E(1)}));
  EXPECT_THROW(lift_solution({}, trace, t), PreconditionError);
}

TEST(Lifting, EmptySolutionOfFreeReduction) {
  auto& t = theta2_table();
  auto g = path_graph(7);
  auto res = exhaustive_replacement(g, t);
  EXPECT_TRUE(is_family_free(res.graph, t.family()));
  EXPECT_TRUE(lift_solution({}, res.trace, t).empty());
}

TEST(Exhaustive, SmallFreeGraphUnchanged) {
  auto& t = theta3_table();
  auto g = path_graph(3);
  auto res = exhaustive_replacement(g, t);
  EXPECT_EQ(res.graph, g);
  EXPECT_TRUE(res.trace.steps.empty());
}

TEST(Exhaustive, PendantTreeCollapses) {
  auto& t = theta3_table();
  // Core with five parallel edges plus a binary tree of 31 vertices below vertex 0.
  auto g = make_graph(2, {{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}});
  for (int i = 0; i < 31; ++i) g.add_vertex(V(2 + i));
  g.add_edge(V(0), V(2));
  for (int i = 1; i < 31; ++i) g.add_edge(V(2 + (i - 1) / 2), V(2 + i));
  auto res = exhaustive_replacement(g, t);
  EXPECT_LE(res.graph.size(), 5u + 2u * static_cast<std::size_t>(t.cF()));
  EXPECT_EQ(res.rounds, static_cast<int>(res.trace.replacements()));
  for (const auto& c : components(res.graph)) EXPECT_FALSE(find_replaceable_protrusion(induced_subgraph(res.graph, c), t));
  EXPECT_EQ(replay(res.trace).back(), res.graph);
  auto sol = EdgeSet{E(0), E(1), E(2)};
  auto lifted = lift_solution(sol & res.graph.edge_set(), res.trace, t);
  EXPECT_LE(lifted.size(), 3u);
}

TEST(ExhaustiveProperties, OptimumPreservedAndLiftingValid) {
  std::mt19937_64 rng(14);
  for (std::string name : {"theta2", "theta3"}) {
    auto f = builtin_family(name);
    auto& t = name == "theta2" ? theta2_table() : theta3_table();
    for (int it = 0; it < 20; ++it) {
      int n = 4 + static_cast<int>(rng() % 8);
      auto g = oracle::random_multigraph(rng, n, n + static_cast<int>(rng() % 6));
      if (g.size() > 16) continue;
      auto res = exhaustive_replacement(g, t);
      EXPECT_LE(res.graph.size(), g.size());
      EXPECT_LE(res.rounds, static_cast<int>(g.size()));
      int o = opt_of(g, f);
      EXPECT_EQ(opt_of(res.graph, f), o) << name << " it=" << it;
      for (const auto& c : components(res.graph)) EXPECT_FALSE(find_replaceable_protrusion(induced_subgraph(res.graph, c), t));
      // Lift an optimal solution of the reduced graph.
      auto h = res.graph;
      std::vector<EdgeId> ids = h.edge_set().items();
      std::optional<EdgeSet> best;
      for (std::uint32_t m = 0; m < (1u << ids.size()) && !best; ++m) {
        if (std::popcount(m) != opt_of(h, f)) continue;
        std::vector<EdgeId> pick;
        for (std::size_t i = 0; i < ids.size(); ++i)
          if ((m >> i) & 1u) pick.push_back(ids[i]);
        if (is_family_free(delete_edges(h, EdgeSet(pick)), f)) best = EdgeSet(pick);
      }
      ASSERT_TRUE(best);
      auto lifted = lift_solution(*best, res.trace, t);
      EXPECT_LE(lifted.size(), best->size());
      EXPECT_TRUE(is_family_free(delete_edges(g, lifted), f));
    }
  }
}
