#pragma once

#include <iosfwd>
#include <set>
#include <utility>
#include <vector>

namespace kcpath {

// Undirected graph with a fixed edge -> Boolean variable numbering.
// Edges are stored as (min endpoint, max endpoint) pairs sorted
// lexicographically; the Boolean variable of an edge is its index in
// that order. The numbering is deterministic so compiled diagrams are
// reproducible across runs.
class Graph {
 public:
  Graph() = default;
  Graph(int num_vertices, std::vector<std::pair<int, int>> edges);

  int num_vertices() const { return num_vertices_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::pair<int, int>& edge(int var) const { return edges_[var]; }
  // -1 if no such edge.
  int edge_var(int u, int v) const;
  const std::vector<int>& incident_vars(int v) const { return incident_[v]; }
  int other_end(int var, int v) const;

 private:
  int num_vertices_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> incident_;
};

// A self-avoiding source-to-destination path, as an ordered edge list.
struct SimplePath {
  std::vector<int> edges;  // edge variables, in traversal order
  int source = -1;
  int destination = -1;
};

// Checks the SimplePath invariants: consecutive edges share exactly one
// vertex, no vertex is visited twice, endpoints match source/destination.
bool is_simple_path(const Graph& g, const SimplePath& p);

// 4-connected grid over unblocked cells. Cells are indexed row-major
// (y * width + x); vertices are the unblocked cells, numbered row-major.
struct GridMap {
  Graph graph;
  int width = 0;
  int height = 0;
  std::vector<int> cell_to_vertex;  // -1 for blocked cells
  std::vector<int> vertex_to_cell;
};

// Throws std::invalid_argument if every cell is blocked.
GridMap build_grid(int width, int height, const std::set<int>& blocked);

// Samples a blocked set of the given density (row-major cells), never
// blocking `keep` cells.
std::set<int> random_blocked_cells(int width, int height, double density,
                                   unsigned long long seed,
                                   const std::set<int>& keep = {});

// Brute-force oracle: the exact set of simple s-d paths, found by
// exhaustive DFS with visited-set backtracking. Deterministic order.
std::vector<SimplePath> enumerate_simple_paths(const Graph& g, int s, int d);

// Oracle for NZ queries: true iff some simple s-d path contains all of
// `prefix_edges` (a path from s) plus `extra_var` (or just the prefix
// when extra_var is -1).
bool prefix_extends_to_path(const Graph& g, int s, int d,
                            const std::vector<int>& prefix_edges,
                            int extra_var = -1);

// Plain-text graph format: line 1 "V E", then E lines "u v".
void write_graph(const Graph& g, std::ostream& os);
Graph read_graph(std::istream& is);

}  // namespace kcpath
