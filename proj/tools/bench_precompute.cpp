#include <chrono>
#include <iostream>
#include <string>

#include "kcpath/nz.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace kcpath;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

// Compares the two connectivity precomputations on corner-to-corner grid
// instances: the quadratic pairwise containment scan (serial reference)
// against the hashed kernel (OpenMP-parallel over variables).
int main(int argc, char** argv) {
  int max_dim = argc > 1 ? std::stoi(argv[1]) : 4;
#ifdef _OPENMP
  std::cout << "openmp threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "openmp: disabled\n";
#endif
  for (int dim = 3; dim <= max_dim; ++dim) {
    GridMap gm = build_grid(dim, dim, {});
    int s = gm.cell_to_vertex[dim - 1];
    int d = gm.cell_to_vertex[(dim - 1) * dim];
    DiagramManager mgr(Vtree::right_linear(gm.graph.num_edges()));
    Psdd p = uniform_parameterize(compile_paths(mgr, gm.graph, s, d));
    auto ssets = build_subcontext_sets(p);
    size_t total = 0;
    for (const auto& ss : ssets) total += ss.count;

    auto t0 = std::chrono::steady_clock::now();
    SubContextTable serial = precompute_connectivity_serial(ssets, mgr.vtree());
    double ts = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    SubContextTable fast = precompute_connectivity(ssets, mgr.vtree());
    double tf = seconds_since(t0);

    bool equal = true;
    int n = fast.num_vars();
    for (int i = 0; i < n * n && equal; ++i) {
      equal = serial.pairs_[i].offsets == fast.pairs_[i].offsets &&
              serial.pairs_[i].data == fast.pairs_[i].data;
    }
    std::cout << dim << "x" << dim << ": " << total << " sub-contexts, serial "
              << ts << "s, hashed " << tf << "s, speedup " << ts / tf
              << ", equal " << (equal ? "yes" : "NO") << "\n";
    if (!equal) return 1;
  }
  return 0;
}
