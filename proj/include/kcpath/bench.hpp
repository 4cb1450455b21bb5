#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kcpath/hierarchy.hpp"
#include "kcpath/marl.hpp"

namespace kcpath {

struct BenchReport {
  std::string map_id;
  int n_paths = 0;
  double scanz_seconds = 0.0;
  double generic_seconds = 0.0;
  double ratio = 0.0;  // generic / scanz
  bool identical_paths = false;
};

// Times n_paths full random rollouts twice over the same seed: feasibility
// by the connectivity tables versus by psdd conditional probabilities.
// Both legs visit the identical state sequence and issue the same queries;
// n_paths is grown automatically if a leg finishes under timer resolution.
BenchReport bench_simulation(const Graph& g, int s, int d, int n_paths,
                             uint64_t seed, const std::string& map_id);

// Hierarchical variant: both legs roll out through the cluster engine,
// with tables vs. conditional probabilities answering every unit-level
// and top-level query. Unit compilation is warmed up before timing.
BenchReport bench_simulation_hier(HierarchyEngine& e, int n_paths,
                                  uint64_t seed, const std::string& map_id);

void write_bench_csv(const BenchReport& r, std::ostream& os);

// Training-curve aggregation: one series per (trainer, agent count),
// several seeded runs each; emits per-series CSV rows of mean cumulative
// samples per agent vs. mean objective at each iteration index.
struct SeriesData {
  std::string name;
  std::vector<std::vector<IterationRecord>> runs;
};

std::vector<IterationRecord> read_metrics_csv(std::istream& is);
void emit_plotdata(const std::vector<SeriesData>& series,
                   const std::string& out_dir);

}  // namespace kcpath
