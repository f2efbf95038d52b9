#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "imdel/errors.hpp"
#include "imdel/multigraph.hpp"

namespace imdel::gen {

// Planted structure recorded next to a generated instance.
struct GroundTruth {
  std::string model;
  std::vector<int> core;        // vertices outside the planted structure
  std::vector<int> protrusion;  // planted pendant tree, if any
  std::vector<int> attachment;  // planted bouquet attachment, if any
  std::vector<int> elements;    // planted bouquet element vertices
  int cycle_rank = 0;           // exact optimum for two parallel edges
};

struct Generated {
  Multigraph graph;
  GroundTruth truth;
};

namespace detail {

// Modulo draws keep instances identical across standard libraries.
inline int draw(std::mt19937_64& rng, int bound) { return static_cast<int>(rng() % static_cast<std::uint64_t>(bound)); }

inline void random_pair_edges(Multigraph& g, std::mt19937_64& rng, const std::vector<int>& pool, int count) {
  int n = static_cast<int>(pool.size());
  for (int i = 0; i < count; ++i) {
    int a = draw(rng, n), b = draw(rng, n - 1);
    if (b >= a) ++b;
    g.add_edge(V(pool[static_cast<std::size_t>(a)]), V(pool[static_cast<std::size_t>(b)]));
  }
}

inline int cycle_rank(const Multigraph& g) { return static_cast<int>(g.size()) - static_cast<int>(g.order()) + static_cast<int>(components(g).size()); }

}  // namespace detail

inline Generated uniform_multigraph(int n, int m, std::uint64_t seed) {
  if (n < 0 || m < 0) throw InputError("n and m must be non-negative");
  if (m > 0 && n < 2) throw InputError("edges need at least two vertices");
  std::mt19937_64 rng(seed);
  Generated out;
  std::vector<int> pool;
  for (int i = 0; i < n; ++i) {
    out.graph.add_vertex(V(i));
    pool.push_back(i);
  }
  detail::random_pair_edges(out.graph, rng, pool, m);
  out.truth.model = "uniform-multigraph";
  out.truth.core = pool;
  out.truth.cycle_rank = detail::cycle_rank(out.graph);
  return out;
}

// Connected: a random core on the first ceil(n/2) vertices holding all
// m - n + 1 surplus edges, and one pendant tree on the rest hanging from a
// single core vertex. The pendant tree is free of every family with a cycle.
inline Generated planted_protrusion(int n, int m, std::uint64_t seed) {
  if (n < 4) throw InputError("planted-protrusion needs n >= 4");
  if (m < n - 1) throw InputError("planted-protrusion needs m >= n - 1 for connectivity");
  int c = (n + 1) / 2;
  std::mt19937_64 rng(seed);
  Generated out;
  for (int i = 0; i < n; ++i) out.graph.add_vertex(V(i));
  std::vector<int> core;
  for (int i = 0; i < c; ++i) {
    core.push_back(i);
    if (i > 0) out.graph.add_edge(V(detail::draw(rng, i)), V(i));
  }
  out.graph.add_edge(V(detail::draw(rng, c)), V(c));
  for (int i = c + 1; i < n; ++i) out.graph.add_edge(V(c + detail::draw(rng, i - c)), V(i));
  detail::random_pair_edges(out.graph, rng, core, m - (n - 1));
  out.truth.model = "planted-protrusion";
  out.truth.core = core;
  for (int i = c; i < n; ++i) out.truth.protrusion.push_back(i);
  out.truth.cycle_rank = m - n + 1;
  return out;
}

// `count` vertices adjacent to exactly vertices 0 and 1, on top of a random
// connected core of the remaining n - count vertices with m - 2 count edges.
inline Generated planted_bouquet(int n, int m, int count, std::uint64_t seed) {
  int c = n - count;
  if (count < 1 || c < 2) throw InputError("planted-bouquet needs count >= 1 and n - count >= 2");
  int core_edges = m - 2 * count;
  if (core_edges < c - 1) throw InputError("planted-bouquet needs m >= 2 count + (n - count - 1)");
  std::mt19937_64 rng(seed);
  Generated out;
  for (int i = 0; i < n; ++i) out.graph.add_vertex(V(i));
  std::vector<int> core;
  for (int i = 0; i < c; ++i) {
    core.push_back(i);
    if (i > 0) out.graph.add_edge(V(detail::draw(rng, i)), V(i));
  }
  detail::random_pair_edges(out.graph, rng, core, core_edges - (c - 1));
  for (int i = c; i < n; ++i) {
    out.graph.add_edge(V(0), V(i));
    out.graph.add_edge(V(i), V(1));
    out.truth.elements.push_back(i);
  }
  out.truth.model = "planted-bouquet";
  out.truth.core = core;
  out.truth.attachment = {0, 1};
  out.truth.cycle_rank = detail::cycle_rank(out.graph);
  return out;
}

}  // namespace imdel::gen
