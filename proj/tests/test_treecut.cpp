#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "imdel/canon.hpp"
#include "imdel/families.hpp"
#include "imdel/treecut.hpp"
#include "oracles.hpp"

using namespace imdel;

namespace {

TreeCutDecomposition single_node(const Multigraph& g) {
  TreeCutDecomposition d;
  d.add_node(-1, g.vertex_set());
  return d;
}

ColoredGraph plain(const Multigraph& g) {
  ColoredGraph c;
  c.n = static_cast<int>(g.order());
  c.color.assign(static_cast<std::size_t>(c.n), 0);
  for (const Edge& e : g.edges()) c.edges.push_back({g.pos(e.u), g.pos(e.v)});
  return c;
}

}  // namespace

TEST(Verify, SingleNodeOnConnectedGraph) {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_TRUE(verify(g, single_node(g)).valid);
}

TEST(Verify, BagOverlapNamesVertex) {
  auto g = make_graph(2, {{0, 1}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0), V(1)});
  d.add_node(0, {V(1)});
  auto rep = verify(g, d);
  ASSERT_FALSE(rep.valid);
  EXPECT_NE(rep.problems.front().find("vertex 1"), std::string::npos);
}

TEST(Verify, TreeSpanningTwoComponents) {
  auto g = make_graph(4, {{0, 1}, {2, 3}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0), V(1)});
  d.add_node(0, {V(2), V(3)});
  EXPECT_FALSE(verify(g, d).valid);
}

TEST(Verify, EmptyTreeAndCyclesRejected) {
  auto g = make_graph(2, {{0, 1}});
  auto d = single_node(g);
  d.add_node(-1, {});
  EXPECT_FALSE(verify(g, d).valid);
  TreeCutDecomposition c;
  c.add_node(1, {V(0)});
  c.add_node(0, {V(1)});
  EXPECT_FALSE(verify(g, c).valid);
  EXPECT_TRUE(verify(Multigraph{}, TreeCutDecomposition{}).valid);
}

TEST(Widths, TriangleSingleNode) {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_EQ(width_prime(g, single_node(g)), 3);
  EXPECT_EQ(width(g, single_node(g)), 3);
}

TEST(Widths, ThetaThreeTwoNodes) {
  auto g = theta_graph(3);
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  d.add_node(0, {V(1)});
  EXPECT_EQ(adhesion(g, d, 1).size(), 3u);
  EXPECT_EQ(width_prime(g, d), 3);
  EXPECT_EQ(width_doubleprime(g, d), 4);
  int wp = width_prime(g, d), wpp = width_doubleprime(g, d);
  EXPECT_LE(wp - 1, wpp);
  EXPECT_LE(wpp, wp * wp);
}

TEST(Widths, InvalidDecompositionThrows) {
  auto g = make_graph(2, {{0, 1}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  EXPECT_THROW(width(g, d), PreconditionError);
}

TEST(Torso, PeripheralDegreeEqualsAdhesion) {
  std::mt19937_64 rng(21);
  for (int it = 0; it < 100; ++it) {
    auto g = oracle::random_connected(rng, 2 + static_cast<int>(rng() % 6), 10);
    auto d = oracle::random_decomposition(rng, g);
    for (int t = 0; t < d.nodes(); ++t) {
      auto tor = torso(g, d, t);
      for (std::size_t i = 0; i < tor.peripheral.size(); ++i) {
        int s = tor.peripheral_nodes[i];
        int a = static_cast<int>(adhesion(g, d, d.parent[static_cast<std::size_t>(t)] == s ? t : s).size());
        EXPECT_EQ(tor.graph.degree(tor.peripheral[i]), a);
      }
    }
  }
}

TEST(Torso, ThreeCenterIndependentOfSuppressionOrder) {
  std::mt19937_64 rng(22);
  for (int it = 0; it < 150; ++it) {
    auto g = oracle::random_connected(rng, 3 + static_cast<int>(rng() % 6), 12);
    auto d = oracle::random_decomposition(rng, g, 4);
    for (int t = 0; t < d.nodes(); ++t) {
      auto base = three_center(g, d, t);
      int p = static_cast<int>(torso(g, d, t).peripheral.size());
      std::vector<int> rank(static_cast<std::size_t>(p));
      std::iota(rank.begin(), rank.end(), 0);
      std::shuffle(rank.begin(), rank.end(), rng);
      auto other = three_center(g, d, t, rank);
      ASSERT_EQ(base.order(), other.order());
      EXPECT_EQ(canonical_form(plain(base)).code, canonical_form(plain(other)).code);
    }
  }
}

TEST(Widths, PrimeAndDoublePrimeBoundEachOther) {
  std::mt19937_64 rng(23);
  for (int it = 0; it < 200; ++it) {
    auto g = oracle::random_multigraph(rng, 1 + static_cast<int>(rng() % 7), static_cast<int>(rng() % 12));
    auto d = oracle::random_decomposition(rng, g);
    int w = width(g, d), wp = width_prime(g, d), wpp = width_doubleprime(g, d);
    EXPECT_LE(w, wp);
    EXPECT_LE(wp - 1, wpp);
    EXPECT_LE(wpp, wp * wp);
  }
}

TEST(Improve, UnchangedWhenAlreadyEqual) {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  EXPECT_EQ(improve_to_width_prime(g, single_node(g)), single_node(g));
  auto t = theta_graph(3);
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  d.add_node(0, {V(1)});
  ASSERT_EQ(width(t, d), width_prime(t, d));
  EXPECT_EQ(improve_to_width_prime(t, d), d);
}

TEST(Improve, WidthPrimeAtMostInputWidth) {
  std::mt19937_64 rng(24);
  int moved = 0;
  for (int it = 0; it < 300; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 7), static_cast<int>(rng() % 15));
    auto d = oracle::random_decomposition(rng, g, 5);
    int steps = 0;
    auto out = improve_to_width_prime(g, d, &steps);
    moved += steps > 0;
    ASSERT_TRUE(verify(g, out).valid);
    EXPECT_LE(width_prime(g, out), width(g, d));
    EXPECT_EQ(width_prime(g, out), width(g, out));
  }
  EXPECT_GT(moved, 10);
}

TEST(Connect, PathWithSplitSide) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0), V(2)});
  d.add_node(0, {V(1)});
  EXPECT_FALSE(is_connected_decomposition(g, d));
  auto out = make_connected(g, d);
  EXPECT_TRUE(is_connected_decomposition(g, out));
  EXPECT_EQ(out.nodes(), 3);
  for (const auto& b : out.bags) EXPECT_EQ(b.size(), 1u);
}

TEST(Connect, ConnectedInputUnchanged) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  d.add_node(0, {V(1)});
  d.add_node(1, {V(2)});
  EXPECT_EQ(make_connected(g, d), d);
}

TEST(Connect, RandomInstances) {
  std::mt19937_64 rng(25);
  for (int it = 0; it < 200; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 7), static_cast<int>(rng() % 14));
    auto d = oracle::random_decomposition(rng, g, 3);
    int k = width_prime(g, d);
    auto out = make_connected(g, d);
    ASSERT_TRUE(verify(g, out).valid);
    EXPECT_TRUE(is_connected_decomposition(g, out));
    EXPECT_LE(width_doubleprime(g, out), width_doubleprime(g, d));
    EXPECT_LE(width_prime(g, out), k * k + 1);
  }
}

TEST(Neat, NoBadNodesUnchanged) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  d.add_node(0, {V(1)});
  d.add_node(1, {V(2)});
  int r = -1;
  EXPECT_EQ(make_neat(g, d, &r), d);
  EXPECT_EQ(r, 0);
}

TEST(Neat, ReroutesBadNodeBelowDeepestBadNeighbour) {
  // x=0 root, b=1 with child c=2, a=3 hangs off the root but only meets x and c.
  // The bold x-b bundle keeps node 1 from being bad itself.
  auto g = make_graph(4, {{0, 1}, {0, 1}, {0, 1}, {1, 2}, {3, 2}, {0, 3}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  d.add_node(0, {V(1)});
  d.add_node(1, {V(2)});
  int t = d.add_node(0, {V(3)});
  ASSERT_TRUE(is_connected_decomposition(g, d));
  ASSERT_FALSE(is_neat(g, d));
  int r = 0;
  auto out = make_neat(g, d, &r);
  EXPECT_EQ(out.parent[static_cast<std::size_t>(t)], 2);
  EXPECT_EQ(r, 1);
  EXPECT_TRUE(is_neat(g, out));
}

TEST(Neat, RequiresConnectedInput) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0), V(2)});
  d.add_node(0, {V(1)});
  EXPECT_THROW(make_neat(g, d), PreconditionError);
}

TEST(Neat, RandomPipelineKeepsWidthAndBoundsReroutings) {
  std::mt19937_64 rng(26);
  for (int it = 0; it < 200; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 8), static_cast<int>(rng() % 15));
    auto c = make_connected(g, oracle::random_decomposition(rng, g, 3));
    int r = 0;
    auto out = make_neat(g, c, &r);
    ASSERT_TRUE(verify(g, out).valid);
    EXPECT_TRUE(is_neat(g, out));
    EXPECT_LE(width_prime(g, out), width_prime(g, c));
    EXPECT_LE(r, c.nodes() * c.nodes());
  }
}

TEST(GomoryHuDecomposition, AdhesionsAreMinimumCuts) {
  std::mt19937_64 rng(27);
  for (int it = 0; it < 100; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 6), static_cast<int>(rng() % 12));
    auto d = gomory_hu_decomposition(g);
    ASSERT_TRUE(verify(g, d).valid);
    EXPECT_TRUE(is_connected_decomposition(g, d));
    for (int t = 0; t < d.nodes(); ++t) {
      int p = d.parent[static_cast<std::size_t>(t)];
      if (p < 0) continue;
      int a = g.pos(d.bags[static_cast<std::size_t>(t)].front()), b = g.pos(d.bags[static_cast<std::size_t>(p)].front());
      EXPECT_EQ(static_cast<int>(adhesion(g, d, t).size()), oracle::lambda_bruteforce(g, a, b));
    }
  }
}

TEST(NeatDecomposition, TreeUnderThetaTwo) {
  auto g = make_graph(6, {{0, 1}, {0, 2}, {0, 3}, {3, 4}, {3, 5}});
  auto f = builtin_family("theta2");
  auto d = neat_decomposition(g, f);
  EXPECT_TRUE(is_neat(g, d));
  EXPECT_LE(width_prime(g, d), 2);
  EXPECT_LE(width_prime(g, d), f.bF);
  for (const auto& b : d.bags) EXPECT_EQ(b.size(), 1u);
}

TEST(NeatDecomposition, TriangleIsNotThetaTwoFree) {
  EXPECT_THROW(neat_decomposition(make_graph(3, {{0, 1}, {1, 2}, {0, 2}}), builtin_family("theta2")), PreconditionError);
}

TEST(NeatDecomposition, CycleUnderThetaThree) {
  auto g = make_graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
  auto f = builtin_family("theta3");
  auto d = neat_decomposition(g, f);
  EXPECT_TRUE(verify(g, d).valid);
  EXPECT_TRUE(is_neat(g, d));
  EXPECT_LE(width_prime(g, d), f.bF);
}

TEST(NeatDecomposition, RandomFreeGraphsStayWithinBound) {
  std::mt19937_64 rng(28);
  for (const char* name : {"theta2", "theta3", "k4"}) {
    auto f = builtin_family(name);
    int done = 0;
    for (int it = 0; it < 400 && done < 40; ++it) {
      auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 9), static_cast<int>(rng() % 14));
      if (!is_family_free(g, f)) continue;
      ++done;
      auto d = neat_decomposition(g, f);
      EXPECT_TRUE(is_neat(g, d));
      EXPECT_LE(width_prime(g, d), f.bF) << name;
    }
    EXPECT_GT(done, 10) << name;
  }
}

TEST(ExactTctw, SingleVertex) {
  Multigraph g;
  g.add_vertex(V(0));
  auto r = exact_tctw(g);
  EXPECT_EQ(r.value, 1);
  EXPECT_EQ(r.decomposition.nodes(), 1);
  EXPECT_EQ(width(g, r.decomposition), 1);
}

TEST(ExactTctw, ThetaGraphsGolden) {
  // Frozen from the exhaustive tree/bag enumeration below.
  EXPECT_EQ(exact_tctw(theta_graph(1)).value, 1);
  for (int k = 2; k <= 5; ++k) EXPECT_EQ(exact_tctw(theta_graph(k)).value, 2) << k;
}

TEST(ExactTctw, MatchesTreeEnumerationOnTinyGraphs) {
  std::mt19937_64 rng(29);
  for (int it = 0; it < 40; ++it) {
    int n = 1 + static_cast<int>(rng() % 4);
    auto g = oracle::random_connected(rng, n, n + static_cast<int>(rng() % 4));
    if (n == 4 && it % 4) continue;
    EXPECT_EQ(exact_tctw(g).value, oracle::tctw_bruteforce(g));
  }
  for (int k = 1; k <= 4; ++k) EXPECT_EQ(oracle::tctw_bruteforce(theta_graph(k)), k == 1 ? 1 : 2);
}

TEST(ExactTctw, WidthAndWidthPrimeOptimaAgree) {
  std::mt19937_64 rng(30);
  for (int it = 0; it < 60; ++it) {
    int n = 1 + static_cast<int>(rng() % 5);
    auto g = oracle::random_connected(rng, n, n + static_cast<int>(rng() % 5));
    auto a = exact_tctw(g, WidthMeasure::width);
    auto b = exact_tctw(g, WidthMeasure::width_prime);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(width(g, a.decomposition), a.value);
    EXPECT_EQ(width_prime(g, b.decomposition), b.value);
  }
}

TEST(ExactTctw, WitnessNeverBeatenByRandomDecompositions) {
  std::mt19937_64 rng(31);
  for (int it = 0; it < 30; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 7), static_cast<int>(rng() % 14));
    int best = exact_tctw(g).value;
    for (int s = 0; s < 30; ++s) EXPECT_LE(best, width(g, oracle::random_decomposition(rng, g, 3)));
  }
  EXPECT_THROW(exact_tctw(make_graph(9, {})), ResourceError);
}

TEST(LcaClosure, Examples) {
  TreeCutDecomposition path;
  path.add_node(-1, {});
  path.add_node(0, {});
  path.add_node(1, {});
  EXPECT_EQ(lca_closure(path, {2}), (std::vector<int>{2}));
  TreeCutDecomposition star;
  star.add_node(-1, {});
  star.add_node(0, {});
  star.add_node(0, {});
  EXPECT_EQ(lca_closure(star, {1, 2}), (std::vector<int>{0, 1, 2}));
  EXPECT_THROW(lca_closure(star, {5}), InputError);
}

TEST(LcaClosure, RandomTreesSatisfyBothBounds) {
  std::mt19937_64 rng(32);
  for (int it = 0; it < 300; ++it) {
    int n = 1 + static_cast<int>(rng() % 20);
    TreeCutDecomposition d;
    for (int i = 0; i < n; ++i) d.add_node(i == 0 || rng() % 7 == 0 ? -1 : static_cast<int>(rng() % static_cast<unsigned>(i)), {});
    std::vector<int> m;
    for (int i = 0; i < n; ++i)
      if (rng() % 3 == 0) m.push_back(i);
    auto c = lca_closure(d, m);
    EXPECT_LE(c.size(), 2 * m.size());
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    for (int x : c) in[static_cast<std::size_t>(x)] = 1;
    // Components of T - c and their neighbours in c.
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
      if (in[static_cast<std::size_t>(s)] || comp[static_cast<std::size_t>(s)] >= 0) continue;
      std::set<int> nbrs;
      std::vector<int> stack{s};
      comp[static_cast<std::size_t>(s)] = s;
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        std::vector<int> adj;
        if (d.parent[static_cast<std::size_t>(x)] >= 0) adj.push_back(d.parent[static_cast<std::size_t>(x)]);
        for (int y = 0; y < n; ++y)
          if (d.parent[static_cast<std::size_t>(y)] == x) adj.push_back(y);
        for (int y : adj) {
          if (in[static_cast<std::size_t>(y)]) nbrs.insert(y);
          else if (comp[static_cast<std::size_t>(y)] < 0) {
            comp[static_cast<std::size_t>(y)] = s;
            stack.push_back(y);
          }
        }
      }
      EXPECT_LE(nbrs.size(), 2u);
    }
  }
}

TEST(NeatClassification, LeafWithSingleEdgeIsNeat) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0)});
  d.add_node(0, {V(1)});
  d.add_node(1, {V(2)});
  auto c = neat_adhesion_classification(g, d, 1);
  EXPECT_EQ(c.neat, (std::vector<int>{0, 2}));
  EXPECT_TRUE(c.other.empty());
}

TEST(NeatClassification, ParentSideAndBoldAdhesions) {
  auto g = make_graph(3, {{0, 1}, {1, 2}, {0, 2}});
  TreeCutDecomposition d;
  d.add_node(-1, {V(0), V(1)});
  d.add_node(0, {V(2)});
  auto c = neat_adhesion_classification(g, d, 1);
  EXPECT_EQ(c.neat, (std::vector<int>{0}));
  auto r = neat_adhesion_classification(g, d, 0);
  EXPECT_EQ(r.neat, (std::vector<int>{1}));
  auto k4 = complete_graph(4);
  TreeCutDecomposition e;
  e.add_node(-1, {V(0), V(1), V(2)});
  e.add_node(0, {V(3)});
  EXPECT_EQ(neat_adhesion_classification(k4, e, 1).other, (std::vector<int>{0}));
}

TEST(NeatClassification, RandomNeatDecompositionsRespectBound) {
  std::mt19937_64 rng(33);
  for (int it = 0; it < 150; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 8), static_cast<int>(rng() % 14));
    auto d = make_neat(g, make_connected(g, oracle::random_decomposition(rng, g, 4)));
    int b = width_prime(g, d);
    for (int p = 0; p < d.nodes(); ++p)
      EXPECT_LE(static_cast<int>(neat_adhesion_classification(g, d, p).other.size()), 2 * b + 1);
  }
}
