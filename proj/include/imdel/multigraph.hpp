#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "imdel/errors.hpp"

namespace imdel {

template <class Tag>
struct Id {
  std::int32_t value = -1;
  constexpr Id() = default;
  constexpr explicit Id(std::int32_t v) : value(v) {}
  constexpr auto operator<=>(const Id&) const = default;
};

struct VertexTag {};
struct EdgeTag {};
using VertexId = Id<VertexTag>;
using EdgeId = Id<EdgeTag>;

constexpr VertexId V(std::int32_t v) { return VertexId{v}; }
constexpr EdgeId E(std::int32_t e) { return EdgeId{e}; }

// Sorted, duplicate-free set of ids.
template <class T>
class IdSet {
 public:
  IdSet() = default;
  IdSet(std::initializer_list<T> xs) : items_(xs) { normalize(); }
  explicit IdSet(std::vector<T> xs) : items_(std::move(xs)) { normalize(); }

  bool contains(T x) const { return std::binary_search(items_.begin(), items_.end(), x); }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }
  const T& operator[](std::size_t i) const { return items_[i]; }
  const std::vector<T>& items() const { return items_; }
  T front() const { return items_.front(); }

  void insert(T x) {
    auto it = std::lower_bound(items_.begin(), items_.end(), x);
    if (it == items_.end() || *it != x) items_.insert(it, x);
  }
  void erase(T x) {
    auto it = std::lower_bound(items_.begin(), items_.end(), x);
    if (it != items_.end() && *it == x) items_.erase(it);
  }

  friend bool operator==(const IdSet&, const IdSet&) = default;
  friend auto operator<=>(const IdSet& a, const IdSet& b) { return a.items_ <=> b.items_; }

  friend IdSet operator|(const IdSet& a, const IdSet& b) {
    std::vector<T> out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IdSet(std::move(out), sorted_tag{});
  }
  friend IdSet operator&(const IdSet& a, const IdSet& b) {
    std::vector<T> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IdSet(std::move(out), sorted_tag{});
  }
  friend IdSet operator-(const IdSet& a, const IdSet& b) {
    std::vector<T> out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return IdSet(std::move(out), sorted_tag{});
  }
  bool subset_of(const IdSet& b) const {
    return std::includes(b.begin(), b.end(), begin(), end());
  }
  bool disjoint(const IdSet& b) const { return (*this & b).empty(); }

 private:
  struct sorted_tag {};
  IdSet(std::vector<T> xs, sorted_tag) : items_(std::move(xs)) {}
  void normalize() {
    std::sort(items_.begin(), items_.end());
    items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
  }
  std::vector<T> items_;
};

using VertexSet = IdSet<VertexId>;
using EdgeSet = IdSet<EdgeId>;

struct Edge {
  EdgeId id;
  VertexId u, v;
  VertexId other(VertexId x) const { return x == u ? v : u; }
  bool joins(VertexId a, VertexId b) const { return (u == a && v == b) || (u == b && v == a); }
};

// Loop-free multigraph. Vertices and edges are kept sorted by id, so the
// position of an element is a dense index usable by algorithms; positions
// shift when an element with a smaller id is inserted, ids never do.
class Multigraph {
 public:
  Multigraph() = default;

  VertexId add_vertex() {
    VertexId v{verts_.empty() ? 0 : verts_.back().value + 1};
    add_vertex(v);
    return v;
  }

  void add_vertex(VertexId v) {
    if (v.value < 0) throw InputError("negative vertex id");
    if (has_vertex(v)) throw InputError("duplicate vertex id " + std::to_string(v.value));
    auto it = std::lower_bound(verts_.begin(), verts_.end(), v);
    std::size_t p = static_cast<std::size_t>(it - verts_.begin());
    verts_.insert(it, v);
    inc_.insert(inc_.begin() + static_cast<std::ptrdiff_t>(p), std::vector<int>{});
    reindex_vertices(p);
  }

  void ensure_vertex(VertexId v) {
    if (!has_vertex(v)) add_vertex(v);
  }

  EdgeId add_edge(VertexId u, VertexId v) {
    EdgeId id{next_edge_id_};
    add_edge(id, u, v);
    return id;
  }

  void add_edge(EdgeId id, VertexId u, VertexId v) {
    if (u == v) throw InputError("loop at vertex " + std::to_string(u.value));
    if (!has_vertex(u) || !has_vertex(v)) throw InputError("edge endpoint is not a vertex");
    if (id.value < 0 || has_edge(id)) throw InputError("bad or duplicate edge id " + std::to_string(id.value));
    auto it = std::lower_bound(edges_.begin(), edges_.end(), id,
                               [](const Edge& e, EdgeId x) { return e.id < x; });
    std::size_t p = static_cast<std::size_t>(it - edges_.begin());
    edges_.insert(it, Edge{id, u, v});
    if (p + 1 != edges_.size()) {
      for (auto& lst : inc_)
        for (int& x : lst)
          if (x >= static_cast<int>(p)) ++x;
    }
    inc_[static_cast<std::size_t>(pos(u))].push_back(static_cast<int>(p));
    inc_[static_cast<std::size_t>(pos(v))].push_back(static_cast<int>(p));
    reindex_edges(p);
    next_edge_id_ = std::max(next_edge_id_, id.value + 1);
  }

  std::size_t order() const { return verts_.size(); }
  std::size_t size() const { return edges_.size(); }

  std::span<const VertexId> vertices() const { return verts_; }
  std::span<const Edge> edges() const { return edges_; }
  VertexSet vertex_set() const { return VertexSet(verts_); }
  EdgeSet edge_set() const {
    std::vector<EdgeId> ids;
    ids.reserve(edges_.size());
    for (const auto& e : edges_) ids.push_back(e.id);
    return EdgeSet(std::move(ids));
  }

  bool has_vertex(VertexId v) const {
    return v.value >= 0 && static_cast<std::size_t>(v.value) < vpos_.size() && vpos_[static_cast<std::size_t>(v.value)] >= 0;
  }
  bool has_edge(EdgeId e) const {
    return e.value >= 0 && static_cast<std::size_t>(e.value) < epos_.size() && epos_[static_cast<std::size_t>(e.value)] >= 0;
  }

  int pos(VertexId v) const {
    if (!has_vertex(v)) throw InputError("unknown vertex id " + std::to_string(v.value));
    return vpos_[static_cast<std::size_t>(v.value)];
  }
  int epos(EdgeId e) const {
    if (!has_edge(e)) throw InputError("unknown edge id " + std::to_string(e.value));
    return epos_[static_cast<std::size_t>(e.value)];
  }
  VertexId vertex_at(int p) const { return verts_[static_cast<std::size_t>(p)]; }
  const Edge& edge_at(int p) const { return edges_[static_cast<std::size_t>(p)]; }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(epos(e))]; }

  // Positions of edges incident to the vertex at position p, in insertion order.
  std::span<const int> incident_at(int p) const { return inc_[static_cast<std::size_t>(p)]; }
  std::span<const int> incident(VertexId v) const { return incident_at(pos(v)); }
  int degree(VertexId v) const { return static_cast<int>(incident(v).size()); }
  int max_degree() const {
    std::size_t d = 0;
    for (const auto& l : inc_) d = std::max(d, l.size());
    return static_cast<int>(d);
  }

  std::int32_t next_edge_id() const { return next_edge_id_; }
  std::int32_t next_vertex_id() const { return verts_.empty() ? 0 : verts_.back().value + 1; }
  // Keeps freshly allocated edge ids above every id ever used by a related graph.
  void reserve_edge_ids(std::int32_t next) { next_edge_id_ = std::max(next_edge_id_, next); }

  friend bool operator==(const Multigraph& a, const Multigraph& b) {
    if (a.verts_ != b.verts_ || a.edges_.size() != b.edges_.size()) return false;
    for (std::size_t i = 0; i < a.edges_.size(); ++i) {
      const auto& x = a.edges_[i];
      const auto& y = b.edges_[i];
      if (x.id != y.id || !x.joins(y.u, y.v)) return false;
    }
    return true;
  }

 private:
  void reindex_vertices(std::size_t from) {
    std::size_t need = static_cast<std::size_t>(verts_.back().value) + 1;
    if (vpos_.size() < need) vpos_.resize(need, -1);
    for (std::size_t i = from; i < verts_.size(); ++i) vpos_[static_cast<std::size_t>(verts_[i].value)] = static_cast<int>(i);
  }
  void reindex_edges(std::size_t from) {
    std::size_t need = static_cast<std::size_t>(edges_.back().id.value) + 1;
    if (need < static_cast<std::size_t>(next_edge_id_)) need = static_cast<std::size_t>(next_edge_id_);
    if (epos_.size() < need) epos_.resize(need, -1);
    for (std::size_t i = from; i < edges_.size(); ++i) epos_[static_cast<std::size_t>(edges_[i].id.value)] = static_cast<int>(i);
  }

  std::vector<VertexId> verts_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> inc_;
  std::vector<int> vpos_;
  std::vector<int> epos_;
  std::int32_t next_edge_id_ = 0;
};

// Graph on vertices 0..n-1 with the given edges, edge ids in list order.
inline Multigraph make_graph(int n, std::initializer_list<std::pair<int, int>> edges) {
  Multigraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(V(i));
  for (auto [a, b] : edges) g.add_edge(V(a), V(b));
  return g;
}

inline Multigraph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
  Multigraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(V(i));
  for (auto [a, b] : edges) g.add_edge(V(a), V(b));
  return g;
}

namespace detail {
inline void check_vertices(const Multigraph& g, const VertexSet& x) {
  for (VertexId v : x)
    if (!g.has_vertex(v)) throw InputError("unknown vertex id " + std::to_string(v.value));
}
inline void check_edges(const Multigraph& g, const EdgeSet& f) {
  for (EdgeId e : f)
    if (!g.has_edge(e)) throw InputError("unknown edge id " + std::to_string(e.value));
}
inline std::vector<char> membership(const Multigraph& g, const VertexSet& x) {
  std::vector<char> in(g.order(), 0);
  for (VertexId v : x) in[static_cast<std::size_t>(g.pos(v))] = 1;
  return in;
}
}  // namespace detail

inline EdgeSet boundary(const Multigraph& g, const VertexSet& x) {
  detail::check_vertices(g, x);
  auto in = detail::membership(g, x);
  std::vector<EdgeId> out;
  for (const Edge& e : g.edges())
    if (in[static_cast<std::size_t>(g.pos(e.u))] != in[static_cast<std::size_t>(g.pos(e.v))]) out.push_back(e.id);
  return EdgeSet(std::move(out));
}

inline EdgeSet edges_between(const Multigraph& g, const VertexSet& x, const VertexSet& y) {
  detail::check_vertices(g, x);
  detail::check_vertices(g, y);
  auto in_x = detail::membership(g, x);
  auto in_y = detail::membership(g, y);
  std::vector<EdgeId> out;
  for (const Edge& e : g.edges()) {
    auto a = static_cast<std::size_t>(g.pos(e.u));
    auto b = static_cast<std::size_t>(g.pos(e.v));
    if ((in_x[a] && in_y[b]) || (in_x[b] && in_y[a])) out.push_back(e.id);
  }
  return EdgeSet(std::move(out));
}

inline VertexSet neighbourhood(const Multigraph& g, const VertexSet& x) {
  auto in = detail::membership(g, x);
  std::vector<VertexId> out;
  for (const Edge& e : g.edges()) {
    bool a = in[static_cast<std::size_t>(g.pos(e.u))], b = in[static_cast<std::size_t>(g.pos(e.v))];
    if (a && !b) out.push_back(e.v);
    if (b && !a) out.push_back(e.u);
  }
  return VertexSet(std::move(out));
}

// Component index per vertex position; components numbered by smallest vertex.
inline std::vector<int> component_labels(const Multigraph& g, int* count = nullptr) {
  std::vector<int> lab(g.order(), -1);
  int c = 0;
  std::vector<int> stack;
  for (int s = 0; s < static_cast<int>(g.order()); ++s) {
    if (lab[static_cast<std::size_t>(s)] >= 0) continue;
    lab[static_cast<std::size_t>(s)] = c;
    stack.push_back(s);
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int ep : g.incident_at(x)) {
        const Edge& e = g.edge_at(ep);
        int y = g.pos(e.other(g.vertex_at(x)));
        if (lab[static_cast<std::size_t>(y)] < 0) {
          lab[static_cast<std::size_t>(y)] = c;
          stack.push_back(y);
        }
      }
    }
    ++c;
  }
  if (count) *count = c;
  return lab;
}

inline std::vector<VertexSet> components(const Multigraph& g) {
  int c = 0;
  auto lab = component_labels(g, &c);
  std::vector<std::vector<VertexId>> parts(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < lab.size(); ++i) parts[static_cast<std::size_t>(lab[i])].push_back(g.vertex_at(static_cast<int>(i)));
  std::vector<VertexSet> out;
  for (auto& p : parts) out.emplace_back(std::move(p));
  return out;
}

inline bool is_connected(const Multigraph& g) {
  int c = 0;
  component_labels(g, &c);
  return c <= 1;
}

inline Multigraph delete_edges(const Multigraph& g, const EdgeSet& f) {
  detail::check_edges(g, f);
  Multigraph h;
  for (VertexId v : g.vertices()) h.add_vertex(v);
  for (const Edge& e : g.edges())
    if (!f.contains(e.id)) h.add_edge(e.id, e.u, e.v);
  h.reserve_edge_ids(g.next_edge_id());
  return h;
}

inline Multigraph induced_subgraph(const Multigraph& g, const VertexSet& x) {
  detail::check_vertices(g, x);
  Multigraph h;
  for (VertexId v : x) h.add_vertex(v);
  for (const Edge& e : g.edges())
    if (x.contains(e.u) && x.contains(e.v)) h.add_edge(e.id, e.u, e.v);
  h.reserve_edge_ids(g.next_edge_id());
  return h;
}

inline Multigraph delete_vertices(const Multigraph& g, const VertexSet& x) {
  detail::check_vertices(g, x);
  return induced_subgraph(g, g.vertex_set() - x);
}

inline Multigraph edge_subgraph(const Multigraph& g, const EdgeSet& f) {
  detail::check_edges(g, f);
  Multigraph h;
  for (VertexId v : g.vertices()) h.add_vertex(v);
  for (EdgeId id : f) {
    const Edge& e = g.edge(id);
    h.add_edge(e.id, e.u, e.v);
  }
  h.reserve_edge_ids(g.next_edge_id());
  return h;
}

struct Contraction {
  Multigraph graph;
  // Original vertex -> representative (smallest id of its merged class).
  std::map<VertexId, VertexId> merge;
};

// Contracts F; loops created are dropped, parallel edges kept with their ids.
inline Contraction contract_edges(const Multigraph& g, const EdgeSet& f) {
  detail::check_edges(g, f);
  std::vector<int> parent(g.order());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  for (EdgeId id : f) {
    const Edge& e = g.edge(id);
    int a = find(g.pos(e.u)), b = find(g.pos(e.v));
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
  Contraction out;
  for (int p = 0; p < static_cast<int>(g.order()); ++p) {
    VertexId rep = g.vertex_at(find(p));
    out.merge[g.vertex_at(p)] = rep;
    if (!out.graph.has_vertex(rep)) out.graph.add_vertex(rep);
  }
  for (const Edge& e : g.edges()) {
    VertexId a = out.merge[e.u], b = out.merge[e.v];
    if (a != b) out.graph.add_edge(e.id, a, b);
  }
  out.graph.reserve_edge_ids(g.next_edge_id());
  return out;
}

// Re-adds edges of `from` (by stored endpoints) that are missing in g.
inline Multigraph restore_edges(const Multigraph& g, const Multigraph& from, const EdgeSet& f) {
  Multigraph h = g;
  for (EdgeId id : f) {
    const Edge& e = from.edge(id);
    h.ensure_vertex(e.u);
    h.ensure_vertex(e.v);
    if (!h.has_edge(id)) h.add_edge(id, e.u, e.v);
  }
  return h;
}

// Number of edges between the two given vertices.
inline int multiplicity(const Multigraph& g, VertexId a, VertexId b) {
  int c = 0;
  for (int ep : g.incident(a))
    if (g.edge_at(ep).other(a) == b) ++c;
  return c;
}

inline bool is_forest(const Multigraph& g) {
  int c = 0;
  component_labels(g, &c);
  return static_cast<int>(g.size()) == static_cast<int>(g.order()) - c;
}

}  // namespace imdel
