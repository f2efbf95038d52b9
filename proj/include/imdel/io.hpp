#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "imdel/errors.hpp"
#include "imdel/families.hpp"
#include "imdel/multigraph.hpp"
#include "imdel/protrusion.hpp"

namespace imdel::io {

using json = nlohmann::json;

// Instance text: '#' comments, one "v <n>" header, then "e <u> <v>" lines.
// Vertex i becomes V(i) and the j-th edge line becomes E(j).
inline Multigraph parse_instance(std::istream& in) {
  Multigraph g;
  std::string line;
  int n = -1, lineno = 0;
  auto fail = [&](const std::string& what) { throw InputError("line " + std::to_string(lineno) + ": " + what); };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      if (n >= 0) fail("duplicate header");
      if (!(ls >> n) || n < 0) fail("bad vertex count");
      for (int i = 0; i < n; ++i) g.add_vertex(V(i));
    } else if (tag == "e") {
      if (n < 0) fail("edge before header");
      long long u = 0, v = 0;
      if (!(ls >> u >> v)) fail("bad edge line");
      if (u < 0 || v < 0 || u >= n || v >= n) fail("endpoint out of range");
      if (u == v) fail("loop");
      g.add_edge(V(static_cast<int>(u)), V(static_cast<int>(v)));
    } else {
      fail("unknown record '" + tag + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (n < 0) throw InputError("missing header line 'v <n>'");
  return g;
}

inline Multigraph parse_instance(const std::string& text) {
  std::istringstream in(text);
  return parse_instance(in);
}

inline Multigraph read_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_instance(in);
}

// Vertices are renumbered by position and edges written in id order, so the
// k-th edge line of the output is the k-th edge of g.
inline std::string render_instance(const Multigraph& g) {
  std::ostringstream out;
  out << "v " << g.order() << '\n';
  for (const Edge& e : g.edges()) out << "e " << g.pos(e.u) << ' ' << g.pos(e.v) << '\n';
  return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Families

inline json graph_to_json(const Multigraph& g) {
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back({g.pos(e.u), g.pos(e.v)});
  return {{"vertices", g.order()}, {"edges", edges}};
}

inline Multigraph graph_from_json(const json& j) {
  Multigraph g;
  int n = j.at("vertices").get<int>();
  if (n < 0) throw InputError("negative vertex count");
  for (int i = 0; i < n; ++i) g.add_vertex(V(i));
  for (const auto& e : j.at("edges")) {
    int u = e.at(0).get<int>(), v = e.at(1).get<int>();
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) throw InputError("bad edge in graph object");
    g.add_edge(V(u), V(v));
  }
  return g;
}

inline json family_to_json(const GraphFamily& f) {
  json members = json::array();
  for (const auto& h : f.members) members.push_back(graph_to_json(h));
  json cf = f.cF ? json(*f.cF) : json("auto");
  return {{"schema", "imdel.family/1"}, {"name", f.name}, {"members", members}, {"bF", f.bF}, {"cF", cf},
          {"c_struct", f.c_struct}, {"c_apx", f.c_apx}, {"c_ker", f.c_ker}};
}

// Family file: the members plus bF and the shipped constants; "cF": "auto"
// takes the table's largest enumerated entry.
inline GraphFamily family_from_json(const json& j) {
  GraphFamily f;
  try {
    f.name = j.value("name", std::string("custom"));
    for (const auto& m : j.at("members")) f.members.push_back(graph_from_json(m));
    f.bF = j.at("bF").get<int>();
    const auto& cf = j.value("cF", json("auto"));
    if (cf.is_number_integer()) {
      f.cF = cf.get<int>();
    } else if (cf != "auto") {
      throw FamilyError("cF must be an integer or \"auto\"");
    }
    f.c_struct = j.value("c_struct", 0.0);
    f.c_apx = j.value("c_apx", 0.0);
    f.c_ker = j.value("c_ker", 0.0);
  } catch (const json::exception& e) {
    throw FamilyError(std::string("family file: ") + e.what());
  } catch (const InputError& e) {
    throw FamilyError(std::string("family file: ") + e.what());
  }
  if (f.c_struct <= 0 || f.c_apx <= 0 || f.c_ker <= 0) throw FamilyError("family file needs positive c_struct, c_apx and c_ker");
  require_valid(f);
  return f;
}

inline GraphFamily load_family(const std::string& name_or_path) {
  if (name_or_path == "theta2" || name_or_path == "theta3" || name_or_path == "k4") return builtin_family(name_or_path);
  json j;
  try {
    j = read_json(name_or_path);
  } catch (const InputError& e) {
    throw FamilyError(std::string("unknown family: ") + e.what());
  }
  return family_from_json(j);
}

// ---------------------------------------------------------------------------
// Replacement tables

inline json table_to_json(const ReplacementTable& t) {
  json entries = json::array();
  for (const auto& [key, list] : t.entries())
    for (const auto& e : list) {
      const auto& g = e.graph.graph;
      json boundary = json::array();
      for (VertexId v : e.graph.boundary) boundary.push_back(g.pos(v));
      entries.push_back({{"graph", graph_to_json(g)},
                         {"boundary", boundary},
                         {"provenance", e.provenance == Provenance::enumerated ? "enumerated" : "observed"}});
    }
  json budgets = json::object();
  for (const auto& [r, b] : t.budgets) budgets[std::to_string(r)] = b;
  return {{"schema", "imdel.table/1"},
          {"family", t.family().name},
          {"immersion_respecting", t.immersion_respecting()},
          {"budgets", budgets},
          {"entries", entries}};
}

// Entries are re-offered, so a loaded table is exactly as trustworthy as a
// freshly built one: every signature is recomputed.
inline ReplacementTable table_from_json(const json& j, const GraphFamily& f, bool immersion_respecting) {
  try {
    if (j.at("family").get<std::string>() != f.name) throw ConfigError("table was built for family '" + j.at("family").get<std::string>() + "'");
    if (j.at("immersion_respecting").get<bool>() != immersion_respecting) throw ConfigError("table replacement mode does not match");
    ReplacementTable t(f, immersion_respecting);
    for (const auto& [r, b] : j.at("budgets").items()) t.budgets[std::stoi(r)] = b.get<int>();
    for (const auto& e : j.at("entries")) {
      BoundariedGraph b;
      b.graph = graph_from_json(e.at("graph"));
      for (const auto& p : e.at("boundary")) {
        int i = p.get<int>();
        if (i < 0 || i >= static_cast<int>(b.graph.order())) throw InputError("boundary index out of range");
        b.boundary.push_back(b.graph.vertex_at(i));
      }
      t.offer(b, e.at("provenance") == "enumerated" ? Provenance::enumerated : Provenance::observed);
    }
    return t;
  } catch (const json::exception& e) {
    throw InputError(std::string("table file: ") + e.what());
  }
}

}  // namespace imdel::io
