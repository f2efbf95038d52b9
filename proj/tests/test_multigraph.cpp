#include <gtest/gtest.h>

#include <random>

#include "imdel/flow.hpp"
#include "imdel/multigraph.hpp"
#include "oracles.hpp"

using namespace imdel;

namespace {

Multigraph triangle() { return make_graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

}  // namespace

TEST(Boundary, TriangleSingleVertex) {
  auto g = triangle();
  EXPECT_EQ(boundary(g, {V(0)}), (EdgeSet{E(0), E(2)}));
}

TEST(Boundary, ParallelEdgesAllCross) {
  auto g = make_graph(2, {{0, 1}, {0, 1}});
  EXPECT_EQ(boundary(g, {V(0)}).size(), 2u);
}

TEST(Boundary, PathEnds) {
  auto g = make_graph(3, {{0, 1}, {1, 2}});
  EXPECT_EQ(boundary(g, {V(0), V(2)}), (EdgeSet{E(0), E(1)}));
}

TEST(Boundary, UnknownVertexIsInputError) {
  EXPECT_THROW(boundary(triangle(), {V(7)}), InputError);
}

TEST(EdgesBetween, Cases) {
  auto g = triangle();
  EXPECT_EQ(edges_between(g, {V(0)}, {V(1)}), (EdgeSet{E(0)}));
  auto all = g.vertex_set();
  EXPECT_EQ(edges_between(g, all, all), g.edge_set());
  auto p = make_graph(4, {{0, 1}, {2, 3}});
  EXPECT_TRUE(edges_between(p, {V(0), V(1)}, {V(2), V(3)}).empty());
  EXPECT_THROW(edges_between(g, {V(0)}, {V(9)}), InputError);
}

TEST(Components, Basic) {
  EXPECT_TRUE(components(Multigraph{}).empty());
  auto t = components(triangle());
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].size(), 3u);
  auto two = components(make_graph(4, {{2, 3}, {0, 1}}));
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], (VertexSet{V(0), V(1)}));
  EXPECT_EQ(two[1], (VertexSet{V(2), V(3)}));
}

TEST(Deletion, DeleteEdgeOfTriangleGivesPath) {
  auto p = delete_edges(triangle(), {E(0)});
  EXPECT_EQ(p.size(), 2u);
  EXPECT_TRUE(p.has_edge(E(1)));
  EXPECT_TRUE(p.has_edge(E(2)));
  EXPECT_TRUE(is_forest(p));
  EXPECT_THROW(delete_edges(triangle(), {E(5)}), InputError);
}

TEST(Deletion, DeleteVertices) {
  auto g = delete_vertices(triangle(), {V(1)});
  EXPECT_EQ(g.order(), 2u);
  EXPECT_EQ(g.edge_set(), (EdgeSet{E(2)}));
}

TEST(Contraction, PathKeepsOtherEdgeId) {
  auto c = contract_edges(make_graph(3, {{0, 1}, {1, 2}}), {E(0)});
  EXPECT_EQ(c.graph.order(), 2u);
  ASSERT_EQ(c.graph.size(), 1u);
  EXPECT_TRUE(c.graph.has_edge(E(1)));
  EXPECT_EQ(c.merge.at(V(1)), V(0));
}

TEST(Contraction, TriangleGivesParallelPair) {
  auto c = contract_edges(triangle(), {E(0)});
  EXPECT_EQ(c.graph.order(), 2u);
  EXPECT_EQ(c.graph.edge_set(), (EdgeSet{E(1), E(2)}));
  EXPECT_EQ(multiplicity(c.graph, V(0), V(2)), 2);
}

TEST(Multigraph, RejectsLoopsAndDuplicates) {
  Multigraph g;
  g.add_vertex(V(0));
  EXPECT_THROW(g.add_edge(V(0), V(0)), InputError);
  EXPECT_THROW(g.add_vertex(V(0)), InputError);
  g.add_vertex(V(1));
  g.add_edge(E(4), V(0), V(1));
  EXPECT_THROW(g.add_edge(E(4), V(0), V(1)), InputError);
  EXPECT_EQ(g.add_edge(V(0), V(1)), E(5));
}

TEST(Multigraph, OutOfOrderInsertionKeepsIndexConsistent) {
  Multigraph g;
  g.add_vertex(V(5));
  g.add_vertex(V(2));
  g.add_vertex(V(9));
  g.add_edge(E(7), V(5), V(9));
  g.add_edge(E(1), V(2), V(5));
  EXPECT_EQ(g.vertex_at(0), V(2));
  EXPECT_EQ(g.edge_at(0).id, E(1));
  EXPECT_EQ(g.degree(V(5)), 2);
  for (int p = 0; p < 3; ++p)
    for (int ep : g.incident_at(p)) {
      const Edge& e = g.edge_at(ep);
      EXPECT_TRUE(e.u == g.vertex_at(p) || e.v == g.vertex_at(p));
    }
}

TEST(MultigraphProperties, CutSymmetryDegreeSumAndRestore) {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 200; ++it) {
    int n = 2 + static_cast<int>(rng() % 7);
    auto g = oracle::random_multigraph(rng, n, static_cast<int>(rng() % 14));
    std::vector<VertexId> xs;
    for (VertexId v : g.vertices())
      if (rng() & 1) xs.push_back(v);
    VertexSet x(xs);
    EXPECT_EQ(boundary(g, x).size(), boundary(g, g.vertex_set() - x).size());
    int deg = 0;
    for (VertexId v : g.vertices()) deg += g.degree(v);
    EXPECT_EQ(deg, 2 * static_cast<int>(g.size()));
    std::vector<EdgeId> fs;
    for (const Edge& e : g.edges())
      if (rng() % 3 == 0) fs.push_back(e.id);
    EdgeSet f(fs);
    auto back = restore_edges(delete_edges(g, f), g, f);
    EXPECT_EQ(back, g);
  }
}

TEST(MultigraphProperties, ComponentsRefineConnectedSides) {
  std::mt19937_64 rng(12);
  int checked = 0;
  for (int it = 0; it < 400; ++it) {
    auto g = oracle::random_connected(rng, 3 + static_cast<int>(rng() % 5), 8);
    std::vector<VertexId> xs;
    for (VertexId v : g.vertices())
      if (rng() & 1) xs.push_back(v);
    VertexSet x(xs), y = g.vertex_set() - x;
    if (x.empty() || y.empty()) continue;
    if (!is_connected(induced_subgraph(g, x)) || !is_connected(induced_subgraph(g, y))) continue;
    ++checked;
    auto cs = components(delete_edges(g, boundary(g, x)));
    ASSERT_EQ(cs.size(), 2u);
    EXPECT_TRUE((cs[0] == x && cs[1] == y) || (cs[0] == y && cs[1] == x));
  }
  EXPECT_GT(checked, 20);
}

TEST(Flow, GomoryHuMatchesPathPacking) {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 60; ++it) {
    auto g = oracle::random_multigraph(rng, 2 + static_cast<int>(rng() % 5), static_cast<int>(rng() % 9));
    auto d = dense(g);
    auto t = gomory_hu(d);
    for (int s = 0; s < d.n; ++s)
      for (int u = s + 1; u < d.n; ++u) {
        int lam = oracle::lambda_bruteforce(g, s, u);
        EXPECT_EQ(t.lambda[static_cast<std::size_t>(s)][static_cast<std::size_t>(u)], lam);
        EXPECT_EQ(local_edge_connectivity(d, s, u), lam);
      }
  }
}

TEST(Flow, PathDecompositionIsValid) {
  std::mt19937_64 rng(14);
  for (int it = 0; it < 100; ++it) {
    auto g = oracle::random_connected(rng, 2 + static_cast<int>(rng() % 6), 12);
    auto d = dense(g);
    std::vector<char> s(static_cast<std::size_t>(d.n), 0), t(static_cast<std::size_t>(d.n), 0);
    s[0] = 1;
    t[static_cast<std::size_t>(d.n - 1)] = 1;
    UnitFlow uf(d);
    auto fr = uf.run(s, t);
    auto ps = uf.paths(fr, s, t);
    EXPECT_EQ(static_cast<int>(ps.size()), fr.value);
    std::set<int> used;
    for (const auto& p : ps) {
      int x = 0;
      for (int e : p) {
        EXPECT_TRUE(used.insert(e).second);
        ASSERT_TRUE(d.ends[static_cast<std::size_t>(e)][0] == x || d.ends[static_cast<std::size_t>(e)][1] == x);
        x = d.other(e, x);
      }
      EXPECT_EQ(x, d.n - 1);
    }
  }
}
