#include "kcpath/bench.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace kcpath {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// Rollouts with table-driven feasibility.
std::vector<std::vector<int>> scanz_leg(const Graph& g, int s, int d,
                                        const SubContextTable& tbl,
                                        int n_paths, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> paths;
  paths.reserve(n_paths);
  for (int r = 0; r < n_paths; ++r) {
    PathState st = init_state(g, s);
    while (st.current_vertex != d) {
      std::vector<int> f = feas(st, g, tbl);
      advance(st, f[rng() % f.size()], g, tbl);
    }
    paths.push_back(std::move(st.path));
  }
  return paths;
}

// The same rollouts with conditional-probability feasibility.
std::vector<std::vector<int>> generic_leg(const Graph& g, int s, int d,
                                          const Psdd& psdd, int n_paths,
                                          uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> paths;
  paths.reserve(n_paths);
  for (int r = 0; r < n_paths; ++r) {
    std::vector<int> path;
    std::vector<char> on_path(g.num_edges(), 0);
    int at = s;
    while (at != d) {
      std::vector<int> f;
      for (int var : g.incident_vars(at)) {
        if (on_path[var]) continue;
        if (conditional_probability(psdd, var, path) > 0.0) f.push_back(var);
      }
      int var = f[rng() % f.size()];
      path.push_back(var);
      on_path[var] = 1;
      at = g.other_end(var, at);
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

}  // namespace

BenchReport bench_simulation(const Graph& g, int s, int d, int n_paths,
                             uint64_t seed, const std::string& map_id) {
  DiagramManager mgr(Vtree::right_linear(g.num_edges()));
  Diagram dd = compile_paths(mgr, g, s, d);
  if (dd.is_false()) throw std::runtime_error("no path between endpoints");
  Psdd psdd = uniform_parameterize(dd);
  SubContextTable tbl = build_table(psdd);

  BenchReport rep;
  rep.map_id = map_id;
  while (true) {
    rep.n_paths = n_paths;
    auto t0 = std::chrono::steady_clock::now();
    auto a = scanz_leg(g, s, d, tbl, n_paths, seed);
    rep.scanz_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    auto b = generic_leg(g, s, d, psdd, n_paths, seed);
    rep.generic_seconds = seconds_since(t0);
    rep.identical_paths = a == b;
    if (rep.scanz_seconds >= 1e-3 && rep.generic_seconds >= 1e-3) break;
    n_paths *= 10;
  }
  rep.ratio = rep.generic_seconds / rep.scanz_seconds;
  return rep;
}

BenchReport bench_simulation_hier(HierarchyEngine& e, int n_paths,
                                  uint64_t seed, const std::string& map_id) {
  auto leg = [&](InferenceMode mode) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<int>> paths;
    paths.reserve(n_paths);
    for (int r = 0; r < n_paths; ++r) {
      SimplePath p = hier_rollout(e, rng, mode);
      if (p.destination < 0) throw std::runtime_error("stranded rollout");
      paths.push_back(std::move(p.edges));
    }
    return paths;
  };
  leg(InferenceMode::kTables);  // warm up the lazy unit cache, untimed

  BenchReport rep;
  rep.map_id = map_id;
  while (true) {
    rep.n_paths = n_paths;
    auto t0 = std::chrono::steady_clock::now();
    auto a = leg(InferenceMode::kTables);
    rep.scanz_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    auto b = leg(InferenceMode::kGeneric);
    rep.generic_seconds = seconds_since(t0);
    rep.identical_paths = a == b;
    if (rep.scanz_seconds >= 1e-3 && rep.generic_seconds >= 1e-3) break;
    n_paths *= 10;
  }
  rep.ratio = rep.generic_seconds / rep.scanz_seconds;
  return rep;
}

void write_bench_csv(const BenchReport& r, std::ostream& os) {
  os << "map,n_paths,scanz_seconds,generic_seconds,ratio,identical_paths\n";
  os << r.map_id << ',' << r.n_paths << ',' << r.scanz_seconds << ','
     << r.generic_seconds << ',' << r.ratio << ',' << r.identical_paths
     << '\n';
}

std::vector<IterationRecord> read_metrics_csv(std::istream& is) {
  std::vector<IterationRecord> out;
  std::string line;
  if (!std::getline(is, line)) return out;  // header
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    IterationRecord r;
    std::istringstream ls(line);
    char comma;
    if (ls >> r.iteration >> comma >> r.avg_objective >> comma >>
        r.cum_samples_per_agent >> comma >> r.stranded) {
      out.push_back(r);
    }
  }
  return out;
}

void emit_plotdata(const std::vector<SeriesData>& series,
                   const std::string& out_dir) {
  for (const auto& s : series) {
    if (s.runs.empty()) {
      std::cerr << "warning: series " << s.name << " has no runs; skipped\n";
      continue;
    }
    size_t len = s.runs.front().size();
    for (const auto& run : s.runs) len = std::min(len, run.size());
    std::filesystem::path out =
        std::filesystem::path(out_dir) / (s.name + ".csv");
    std::ofstream os(out);
    os << "cum_samples_per_agent,avg_objective\n";
    for (size_t i = 0; i < len; ++i) {
      double x = 0.0, y = 0.0;
      for (const auto& run : s.runs) {
        x += run[i].cum_samples_per_agent;
        y += run[i].avg_objective;
      }
      os << x / s.runs.size() << ',' << y / s.runs.size() << '\n';
    }
  }
}

}  // namespace kcpath
