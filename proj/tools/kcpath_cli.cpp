#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "kcpath/bench.hpp"

namespace fs = std::filesystem;
using namespace kcpath;

namespace {

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MapSpec {
  std::string id;
  Graph graph;
  std::optional<GridMap> grid;
  int source = 0;
  int dest = 0;
};

// "g5" (the 5-vertex example graph) or "WxH" 4-connected grids, with
// optional random obstacles that never block the corner endpoints.
MapSpec parse_map(const std::string& name, double obstacle_density,
                  uint64_t seed) {
  MapSpec m;
  m.id = name;
  if (name == "g5") {
    m.graph = Graph(5, {{0, 1}, {1, 2}, {1, 3}, {2, 3}, {3, 4}});
    m.source = 0;
    m.dest = 4;
    return m;
  }
  int w, h;
  char x;
  std::istringstream is(name);
  if (!(is >> w >> x >> h) || x != 'x' || w < 2 || h < 2) {
    throw CLI::ValidationError("--map", "expected g5 or WxH, got " + name);
  }
  std::set<int> keep = {w - 1, (h - 1) * w};  // top-right, bottom-left
  std::set<int> blocked;
  if (obstacle_density > 0) {
    blocked = random_blocked_cells(w, h, obstacle_density, seed, keep);
  }
  m.grid = build_grid(w, h, blocked);
  m.graph = m.grid->graph;
  m.source = m.grid->cell_to_vertex[w - 1];
  m.dest = m.grid->cell_to_vertex[(h - 1) * w];
  return m;
}

uint64_t fnv_mix(uint64_t h, uint64_t v) {
  return (h ^ v) * 0x100000001b3ULL;
}

uint64_t table_cache_key(const Graph& g, int s, int d) {
  uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv_mix(h, g.num_vertices());
  for (int e = 0; e < g.num_edges(); ++e) {
    h = fnv_mix(h, g.edge(e).first);
    h = fnv_mix(h, g.edge(e).second);
  }
  h = fnv_mix(h, s);
  return fnv_mix(h, d);
}

SubContextTable cached_table(const Psdd& p, const Graph& g, int s, int d,
                             const std::string& cache_dir) {
  if (cache_dir.empty()) return build_table(p);
  fs::create_directories(cache_dir);
  char name[64];
  std::snprintf(name, sizeof(name), "nz_%016llx.tbl",
                static_cast<unsigned long long>(table_cache_key(g, s, d)));
  fs::path file = fs::path(cache_dir) / name;
  if (fs::exists(file)) {
    std::ifstream is(file, std::ios::binary);
    return read_table(is);
  }
  SubContextTable tbl = build_table(p);
  std::ofstream os(file, std::ios::binary);
  write_table(tbl, os);
  return tbl;
}

int run(int argc, char** argv) {
  CLI::App app{"Simple-path knowledge compilation and masked MAPF training"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "Global RNG seed");
  app.add_option("--out-dir", out_dir, "Output directory");

  std::string map_name = "4x4";
  double density = 0.0;

  auto* graph_cmd = app.add_subcommand("graph", "Graph utilities");
  auto* gen = graph_cmd->add_subcommand("gen", "Generate a map graph file");
  gen->add_option("--map", map_name, "g5 or WxH grid");
  gen->add_option("--obstacle-density", density, "Fraction of blocked cells");

  auto* compile_cmd =
      app.add_subcommand("compile", "Compile all simple s-d paths");
  int src = -1, dst = -1;
  std::vector<int> landmarks;
  std::string nz_cache, graph_file;
  compile_cmd->add_option("--map", map_name, "g5 or WxH grid");
  compile_cmd->add_option("--graph", graph_file, "Graph file instead of --map");
  compile_cmd->add_option("--source", src, "Source vertex (default map corner)");
  compile_cmd->add_option("--dest", dst, "Destination vertex");
  compile_cmd->add_option("--landmark", landmarks, "Vertices the path must visit");
  compile_cmd->add_option("--nz-cache", nz_cache, "Connectivity table cache dir");
  compile_cmd->add_option("--obstacle-density", density, "Blocked-cell fraction");

  auto* bench_cmd = app.add_subcommand("bench", "Time table vs generic rollouts");
  int n_paths = 10000, cluster_w = 0, cluster_h = 0;
  bench_cmd->add_option("--map", map_name, "g5 or WxH grid");
  bench_cmd->add_option("--paths", n_paths, "Rollouts per timed leg");
  bench_cmd->add_option("--cluster-w", cluster_w, "Cluster width (hierarchical)");
  bench_cmd->add_option("--cluster-h", cluster_h, "Cluster height (hierarchical)");
  bench_cmd->add_option("--obstacle-density", density, "Blocked-cell fraction");

  auto* train_cmd = app.add_subcommand("train", "Run a training experiment");
  int agents = 2, iterations = 200, runs = 1;
  std::string trainer = "reinforce-masked";
  train_cmd->add_option("--map", map_name, "g5 or WxH grid");
  train_cmd->add_option("--agents", agents, "Number of agents");
  train_cmd->add_option("--trainer", trainer,
                        "reinforce-masked|reinforce-unmasked|q-feasible|q-full");
  train_cmd->add_option("--iterations", iterations, "Episodes per run");
  train_cmd->add_option("--runs", runs, "Independently seeded runs");
  train_cmd->add_option("--obstacle-density", density, "Blocked-cell fraction");

  auto* plot_cmd = app.add_subcommand("plotdata", "Aggregate training CSVs");
  std::string log_dir;
  plot_cmd->add_option("--log-dir", log_dir, "Directory of *_runN.csv files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Normalize every parse failure to the config-error exit code.
    return app.exit(e) == 0 ? 0 : 2;
  }
  fs::create_directories(out_dir);

  if (gen->parsed()) {
    MapSpec m = parse_map(map_name, density, seed);
    std::ofstream os(fs::path(out_dir) / (m.id + ".graph"));
    write_graph(m.graph, os);
    std::cout << "wrote " << m.id << ".graph: " << m.graph.num_vertices()
              << " vertices, " << m.graph.num_edges() << " edges\n";
    return 0;
  }

  if (compile_cmd->parsed()) {
    MapSpec m;
    if (!graph_file.empty()) {
      std::ifstream is(graph_file);
      if (!is) throw CLI::ValidationError("--graph", "cannot open " + graph_file);
      m.graph = read_graph(is);
      m.id = fs::path(graph_file).stem().string();
      m.source = 0;
      m.dest = m.graph.num_vertices() - 1;
    } else {
      m = parse_map(map_name, density, seed);
    }
    if (src >= 0) m.source = src;
    if (dst >= 0) m.dest = dst;
    DiagramManager mgr(Vtree::right_linear(m.graph.num_edges()));
    Diagram dd = compile_paths(mgr, m.graph, m.source, m.dest);
    for (int lm : landmarks) {
      dd = conjoin(dd, compile_landmark(mgr, m.graph, lm));
    }
    if (dd.is_false()) {
      std::cerr << "no simple path satisfies the constraints\n";
      throw InfeasibleError("infeasible instance");
    }
    Psdd psdd = uniform_parameterize(dd);
    cached_table(psdd, m.graph, m.source, m.dest, nz_cache);
    std::ofstream os(fs::path(out_dir) / (m.id + ".psdd"));
    write_psdd(psdd, os);
    std::cout << "models: " << model_count(dd) << "\n";
    return 0;
  }

  if (bench_cmd->parsed()) {
    MapSpec m = parse_map(map_name, density, seed);
    BenchReport rep;
    if (cluster_w > 0 || cluster_h > 0) {
      if (!m.grid) {
        throw CLI::ValidationError("--cluster-w", "clusters need a grid map");
      }
      HierarchyEngine eng(
          partition_grid(*m.grid, cluster_w, std::max(cluster_h, 1)),
          m.source, m.dest);
      if (!eng.feasible()) throw InfeasibleError("infeasible instance");
      rep = bench_simulation_hier(eng, n_paths, seed, m.id);
    } else {
      if (!prefix_extends_to_path(m.graph, m.source, m.dest, {})) {
        throw InfeasibleError("infeasible instance");
      }
      rep = bench_simulation(m.graph, m.source, m.dest, n_paths, seed, m.id);
    }
    std::ofstream os(fs::path(out_dir) / ("bench_" + m.id + ".csv"));
    write_bench_csv(rep, os);
    std::cout << m.id << ": tables " << rep.scanz_seconds << "s, generic "
              << rep.generic_seconds << "s, ratio " << rep.ratio << "\n";
    return 0;
  }

  if (train_cmd->parsed()) {
    MapSpec m = parse_map(map_name, density, seed);
    if (!m.grid) {
      throw CLI::ValidationError("--map", "training expects a grid map");
    }
    int w = m.grid->width, h = m.grid->height;
    ExperimentConfig cfg;
    cfg.graph = &m.graph;
    cfg.trainer = parse_trainer(trainer);
    cfg.iterations = iterations;
    // Agent i starts on the top row and targets the mirrored bottom cell.
    for (int i = 0; i < agents; ++i) {
      int sc = m.grid->cell_to_vertex[i % w];
      int gc = m.grid->cell_to_vertex[(h - 1) * w + (w - 1 - i % w)];
      if (sc < 0 || gc < 0) {
        throw InfeasibleError("agent endpoint blocked");
      }
      cfg.tasks.push_back({sc, gc});
    }
    std::mt19937_64 rng(seed);
    cfg.env.capacity.resize(m.graph.num_vertices());
    for (int& c : cfg.env.capacity) c = 1 + static_cast<int>(rng() % 2);
    for (int r = 0; r < runs; ++r) {
      cfg.seed = rng();
      std::vector<IterationRecord> recs;
      try {
        recs = run_experiment(cfg);
      } catch (const std::runtime_error& e) {
        throw InfeasibleError(e.what());
      }
      std::ofstream os(fs::path(out_dir) /
                       (trainer + "_run" + std::to_string(r) + ".csv"));
      write_metrics_csv(recs, os);
    }
    std::cout << "wrote " << runs << " run(s) for " << trainer << " on "
              << m.id << "\n";
    return 0;
  }

  if (plot_cmd->parsed()) {
    std::map<std::string, SeriesData> series;
    for (const auto& entry : fs::directory_iterator(log_dir)) {
      std::string stem = entry.path().stem().string();
      auto pos = stem.rfind("_run");
      if (entry.path().extension() != ".csv" || pos == std::string::npos) {
        continue;
      }
      std::ifstream is(entry.path());
      auto recs = read_metrics_csv(is);
      if (recs.empty()) continue;
      std::string name = stem.substr(0, pos);
      series[name].name = name;
      series[name].runs.push_back(std::move(recs));
    }
    if (series.empty()) {
      std::cerr << "warning: no metrics CSVs in " << log_dir << "\n";
      return 0;
    }
    std::vector<SeriesData> all;
    for (auto& [k, v] : series) all.push_back(std::move(v));
    emit_plotdata(all, out_dir);
    std::cout << "wrote " << all.size() << " series\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
