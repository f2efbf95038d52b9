#pragma once

#include <string>

#include "imdel/errors.hpp"
#include "imdel/immersion.hpp"

namespace imdel {

inline Multigraph theta_graph(int k) {
  Multigraph g;
  g.add_vertex(V(0));
  g.add_vertex(V(1));
  for (int i = 0; i < k; ++i) g.add_edge(V(0), V(1));
  return g;
}

inline Multigraph complete_graph(int n) {
  Multigraph g;
  for (int i = 0; i < n; ++i) g.add_vertex(V(i));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) g.add_edge(V(a), V(b));
  return g;
}

// Built-in families with their certified width bound and shipped constants.
// bF: a Gomory-Hu decomposition with singleton bags has adhesions of size
// lambda < k in a theta_k-free graph, so bF(theta_k) = k - 1 bounds width'.
inline GraphFamily builtin_family(const std::string& name) {
  GraphFamily f;
  f.name = name;
  if (name == "theta2") {
    f.members = {theta_graph(2)};
    f.bF = 1;
    f.cF = 1;
    f.c_struct = 10;
    f.c_apx = 8;
    f.c_ker = 40;
  } else if (name == "theta3") {
    f.members = {theta_graph(3)};
    f.bF = 2;
    f.cF = std::nullopt;
    f.c_struct = 10;
    f.c_apx = 16;
    f.c_ker = 80;
  } else if (name == "k4") {
    f.members = {complete_graph(4)};
    f.bF = 3;
    f.cF = std::nullopt;
    f.c_struct = 12;
    f.c_apx = 24;
    f.c_ker = 120;
  } else {
    throw FamilyError("unknown built-in family '" + name + "'");
  }
  return f;
}

}  // namespace imdel
