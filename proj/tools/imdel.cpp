#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "imdel/families.hpp"
#include "imdel/generate.hpp"
#include "imdel/io.hpp"
#include "imdel/reduction.hpp"
#include "imdel/treecut.hpp"

using namespace imdel;
using json = nlohmann::json;

namespace {

constexpr const char* kSchema = "imdel.report/1";

enum Exit : int { ok = 0, no_instance = 2, usage = 64, bad_family = 65, resource = 69, internal = 70 };

struct Config {
  std::string family = "theta2";
  std::uint64_t seed = 0;
  std::string format = "json";
  bool immersion_respecting = false;
  int max_oracle_edges = 25;
  std::string table_path;
};

json ids(const EdgeSet& s) {
  json a = json::array();
  for (EdgeId e : s) a.push_back(e.value);
  return a;
}

json positions(const std::vector<int>& v) { return json(v); }

void emit(const Config& cfg, const json& report) {
  if (cfg.format == "json") {
    std::cout << report.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : report.items()) {
    std::cout << key << ':';
    if (value.is_array()) {
      for (const auto& x : value) std::cout << ' ' << (x.is_string() ? x.get<std::string>() : x.dump());
    } else {
      std::cout << ' ' << (value.is_string() ? value.get<std::string>() : value.dump());
    }
    std::cout << '\n';
  }
}

json header(const std::string& command, const GraphFamily& f) { return {{"schema", kSchema}, {"command", command}, {"family", f.name}}; }

// A table file that exists is loaded; otherwise the default table is built
// and, when a path was given, saved before any command runs so later runs
// start from the same state.
ReplacementTable make_table(const Config& cfg, const GraphFamily& f) {
  if (!cfg.table_path.empty() && std::filesystem::exists(cfg.table_path))
    return io::table_from_json(io::read_json(cfg.table_path), f, cfg.immersion_respecting);
  auto t = default_table(f, {}, cfg.immersion_respecting);
  if (!cfg.table_path.empty()) io::write_text(cfg.table_path, io::table_to_json(t).dump(1) + '\n');
  return t;
}

ProtrusionOptions protrusion_options(const Config& cfg) {
  ProtrusionOptions o;
  o.seed = cfg.seed;
  return o;
}

json trace_json(const ReductionTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    if (const auto* r = std::get_if<ReplacementRecord>(&s)) {
      json removed = json::array();
      for (VertexId v : r->removed.part.graph.vertices()) removed.push_back(v.value);
      json glue = json::array();
      for (EdgeId e : r->removed.glue) glue.push_back(e.value);
      json inserted = json::array();
      for (const Edge& e : r->inserted.graph.edges()) inserted.push_back({e.id.value, e.u.value, e.v.value});
      steps.push_back({{"kind", "replacement"}, {"removed_vertices", removed}, {"glue", glue}, {"inserted_edges", inserted}});
    } else {
      const auto& p = std::get<PruneRecord>(s);
      json removed = json::array();
      for (VertexId v : p.removed_vertices) removed.push_back(v.value);
      steps.push_back({{"kind", "prune"},
                       {"rule", p.rule},
                       {"removed_vertices", removed},
                       {"removed_edges", ids(p.removed_edges)},
                       {"delta", ids(p.delta)}});
    }
  }
  return steps;
}

int cmd_solve(const Config& cfg, const std::string& path, int k) {
  auto f = io::load_family(cfg.family);
  auto g = io::read_instance(path);
  auto table = make_table(cfg, f);
  auto res = solve_fpt(g, k, table, protrusion_options(cfg));
  json r = header("solve", f);
  r["k"] = k;
  r["kernel_edges"] = res.kernel.no_instance ? json(nullptr) : json(res.kernel.graph.size());
  if (!res.solution) {
    r["status"] = "no";
    emit(cfg, r);
    return Exit::no_instance;
  }
  r["status"] = "yes";
  r["solution"] = ids(res.solution->edges);
  r["size"] = res.solution->edges.size();
  r["verified"] = res.solution->verified;
  emit(cfg, r);
  return Exit::ok;
}

int cmd_approx(const Config& cfg, const std::string& path) {
  auto f = io::load_family(cfg.family);
  auto g = io::read_instance(path);
  auto table = make_table(cfg, f);
  auto s = approximate(g, table, protrusion_options(cfg));
  json r = header("approx", f);
  r["solution"] = ids(s.edges);
  r["size"] = s.edges.size();
  r["verified"] = s.verified;
  r["ratio_bound"] = f.c_apx;
  emit(cfg, r);
  return Exit::ok;
}

int cmd_kernel(const Config& cfg, const std::string& path, int k, const std::string& out, const std::string& trace_out) {
  auto f = io::load_family(cfg.family);
  auto g = io::read_instance(path);
  auto table = make_table(cfg, f);
  auto res = kernelize(g, k, table, protrusion_options(cfg));
  json r = header("kernel", f);
  r["k"] = k;
  r["input_edges"] = g.size();
  if (res.no_instance) {
    r["status"] = "no";
    r["approx_size"] = res.stats.approx_size;
    emit(cfg, r);
    return Exit::no_instance;
  }
  const auto& h = res.graph;
  r["status"] = "kernel";
  r["kernel_vertices"] = h.order();
  r["kernel_edges"] = h.size();
  r["size_bound"] = f.c_ker * k;
  r["stats"] = {{"iterations", res.stats.iterations},
                {"replacements", res.stats.replacements},
                {"prunings", res.stats.prunings},
                {"approx_size", res.stats.approx_size},
                {"stalled", res.stats.stalled}};
  // Line i of the kernel file is the edge with internal id edge_ids[i].
  json vids = json::array(), eids = json::array();
  for (VertexId v : h.vertices()) vids.push_back(v.value);
  for (const Edge& e : h.edges()) eids.push_back(e.id.value);
  r["vertex_ids"] = vids;
  r["edge_ids"] = eids;
  if (!out.empty()) {
    io::write_text(out, io::render_instance(h));
    r["kernel_file"] = out;
  }
  if (!trace_out.empty()) {
    json t = {{"schema", "imdel.trace/1"}, {"family", f.name}, {"steps", trace_json(res.trace)}};
    io::write_text(trace_out, t.dump(1) + '\n');
    r["trace_file"] = trace_out;
  }
  emit(cfg, r);
  return Exit::ok;
}

int cmd_tctw(const Config& cfg, const std::string& path) {
  auto g = io::read_instance(path);
  auto w = exact_tctw(g);
  json bags = json::array();
  for (const auto& b : w.decomposition.bags) {
    json bag = json::array();
    for (VertexId v : b) bag.push_back(v.value);
    bags.push_back(bag);
  }
  json r = {{"schema", kSchema}, {"command", "tctw"}, {"tctw", w.value}, {"parent", w.decomposition.parent}, {"bags", bags}};
  emit(cfg, r);
  return Exit::ok;
}

int cmd_free(const Config& cfg, const std::string& path) {
  auto f = io::load_family(cfg.family);
  auto g = io::read_instance(path);
  json r = header("free", f);
  std::optional<std::size_t> hit;
  for (std::size_t i = 0; i < f.members.size() && !hit; ++i)
    if (contains_immersion(f.members[i], g)) hit = i;
  r["free"] = !hit.has_value();
  r["member"] = hit ? json(*hit) : json(nullptr);
  emit(cfg, r);
  return Exit::ok;
}

int cmd_oracle(const Config& cfg, const std::string& path) {
  auto f = io::load_family(cfg.family);
  auto g = io::read_instance(path);
  OracleGuard guard;
  guard.max_edges = cfg.max_oracle_edges;
  json r = header("oracle", f);
  r["opt"] = opt_bruteforce(g, f, guard);
  emit(cfg, r);
  return Exit::ok;
}

int cmd_gen(const Config& cfg, const std::string& model, int n, int m, std::optional<int> count, const std::string& out, std::string truth) {
  gen::Generated g;
  if (model == "uniform-multigraph") {
    g = gen::uniform_multigraph(n, m, cfg.seed);
  } else if (model == "planted-protrusion") {
    g = gen::planted_protrusion(n, m, cfg.seed);
  } else if (model == "planted-bouquet") {
    int c = count ? *count : make_table(cfg, io::load_family(cfg.family)).dF();
    g = gen::planted_bouquet(n, m, c, cfg.seed);
  } else {
    throw InputError("unknown model '" + model + "'");
  }
  auto text = io::render_instance(g.graph);
  if (out.empty()) {
    std::cout << text;
  } else {
    io::write_text(out, text);
    if (truth.empty()) truth = out + ".truth.json";
  }
  if (!truth.empty()) {
    json t = {{"schema", "imdel.truth/1"},
              {"model", g.truth.model},
              {"seed", cfg.seed},
              {"vertices", g.graph.order()},
              {"edges", g.graph.size()},
              {"core", positions(g.truth.core)},
              {"protrusion", positions(g.truth.protrusion)},
              {"attachment", positions(g.truth.attachment)},
              {"elements", positions(g.truth.elements)},
              {"theta2_opt", g.truth.cycle_rank}};
    io::write_text(truth, t.dump(1) + '\n');
  }
  return Exit::ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"F-immersion deletion: kernelization, approximation and exact solving"};
  app.require_subcommand(1);
  app.fallthrough();
  Config cfg;
  app.add_option("--family", cfg.family, "Built-in family (theta2, theta3, k4) or a family JSON file")->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for every randomized choice")->capture_default_str();
  app.add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  app.add_flag("--immersion-respecting", cfg.immersion_respecting, "Only replace by representatives that immerse in the part");
  app.add_option("--max-oracle-edges", cfg.max_oracle_edges, "Edge limit of the brute-force oracle")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--table", cfg.table_path, "Replacement table file; created when missing");

  std::string instance;
  int k = 0;
  auto add_instance = [&](CLI::App* c) { c->add_option("instance", instance, "Instance file")->required(); };

  auto* solve = app.add_subcommand("solve", "Exact solution of size at most k, or NO");
  add_instance(solve);
  solve->add_option("-k", k, "Deletion budget")->required()->check(CLI::NonNegativeNumber);

  auto* approx = app.add_subcommand("approx", "Constant-factor approximate deletion set");
  add_instance(approx);

  std::string kernel_out, trace_out;
  auto* kernel = app.add_subcommand("kernel", "Linear kernel, or NO");
  add_instance(kernel);
  kernel->add_option("-k", k, "Deletion budget")->required()->check(CLI::NonNegativeNumber);
  kernel->add_option("--out", kernel_out, "Write the kernel instance here");
  kernel->add_option("--trace", trace_out, "Write the reduction trace here");

  auto* tctw = app.add_subcommand("tctw", "Exact tree-cut width of a small graph");
  add_instance(tctw);

  auto* free = app.add_subcommand("free", "Whether the instance is free of the family");
  add_instance(free);

  auto* oracle = app.add_subcommand("oracle", "Brute-force optimum");
  add_instance(oracle);

  std::string model = "uniform-multigraph", gen_out, truth_out;
  int n = 0, m = 0;
  std::optional<int> count;
  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("--model", model, "uniform-multigraph, planted-protrusion or planted-bouquet")
      ->check(CLI::IsMember({"uniform-multigraph", "planted-protrusion", "planted-bouquet"}))
      ->capture_default_str();
  gen->add_option("-n", n, "Vertices")->required();
  gen->add_option("-m", m, "Edges")->required();
  gen->add_option("--count", count, "Bouquet elements (default dF of the family)");
  gen->add_option("--out", gen_out, "Instance file (default stdout)");
  gen->add_option("--truth", truth_out, "Ground-truth sidecar (default <out>.truth.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::usage;
  }

  try {
    if (*solve) return cmd_solve(cfg, instance, k);
    if (*approx) return cmd_approx(cfg, instance);
    if (*kernel) return cmd_kernel(cfg, instance, k, kernel_out, trace_out);
    if (*tctw) return cmd_tctw(cfg, instance);
    if (*free) return cmd_free(cfg, instance);
    if (*oracle) return cmd_oracle(cfg, instance);
    if (*gen) return cmd_gen(cfg, model, n, m, count, gen_out, truth_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::usage;
  } catch (const FamilyError& e) {
    std::cerr << "family error: " << e.what() << '\n';
    return Exit::bad_family;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return Exit::bad_family;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return Exit::resource;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return Exit::internal;
  }
  return Exit::usage;
}
