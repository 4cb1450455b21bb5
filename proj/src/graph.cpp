#include "kcpath/graph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

namespace kcpath {

Graph::Graph(int num_vertices, std::vector<std::pair<int, int>> edges)
    : num_vertices_(num_vertices) {
  if (num_vertices < 0) throw std::invalid_argument("negative vertex count");
  for (auto& e : edges) {
    if (e.first == e.second) throw std::invalid_argument("self-loop edge");
    if (e.first < 0 || e.second < 0 || e.first >= num_vertices ||
        e.second >= num_vertices) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
    throw std::invalid_argument("duplicate edge");
  }
  edges_ = std::move(edges);
  incident_.assign(num_vertices_, {});
  for (int var = 0; var < static_cast<int>(edges_.size()); ++var) {
    incident_[edges_[var].first].push_back(var);
    incident_[edges_[var].second].push_back(var);
  }
}

int Graph::edge_var(int u, int v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{u, v});
  if (it == edges_.end() || *it != std::pair{u, v}) return -1;
  return static_cast<int>(it - edges_.begin());
}

int Graph::other_end(int var, int v) const {
  const auto& e = edges_[var];
  if (e.first == v) return e.second;
  if (e.second == v) return e.first;
  throw std::invalid_argument("vertex not incident to edge");
}

bool is_simple_path(const Graph& g, const SimplePath& p) {
  if (p.edges.empty()) return false;
  std::vector<char> visited(g.num_vertices(), 0);
  int at = p.source;
  visited[at] = 1;
  for (int var : p.edges) {
    const auto& e = g.edge(var);
    if (e.first != at && e.second != at) return false;
    at = g.other_end(var, at);
    if (visited[at]) return false;
    visited[at] = 1;
  }
  return at == p.destination;
}

GridMap build_grid(int width, int height, const std::set<int>& blocked) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("grid dimensions must be positive");
  }
  for (int c : blocked) {
    if (c < 0 || c >= width * height) {
      throw std::invalid_argument("blocked cell out of range");
    }
  }
  GridMap gm;
  gm.width = width;
  gm.height = height;
  gm.cell_to_vertex.assign(width * height, -1);
  for (int cell = 0; cell < width * height; ++cell) {
    if (blocked.count(cell)) continue;
    gm.cell_to_vertex[cell] = static_cast<int>(gm.vertex_to_cell.size());
    gm.vertex_to_cell.push_back(cell);
  }
  if (gm.vertex_to_cell.empty()) {
    throw std::invalid_argument("grid has no unblocked cells");
  }
  std::vector<std::pair<int, int>> edges;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int v = gm.cell_to_vertex[y * width + x];
      if (v < 0) continue;
      if (x + 1 < width) {
        int r = gm.cell_to_vertex[y * width + x + 1];
        if (r >= 0) edges.emplace_back(v, r);
      }
      if (y + 1 < height) {
        int dn = gm.cell_to_vertex[(y + 1) * width + x];
        if (dn >= 0) edges.emplace_back(v, dn);
      }
    }
  }
  gm.graph = Graph(static_cast<int>(gm.vertex_to_cell.size()), std::move(edges));
  return gm;
}

std::set<int> random_blocked_cells(int width, int height, double density,
                                   unsigned long long seed,
                                   const std::set<int>& keep) {
  std::mt19937_64 rng(seed);
  std::set<int> blocked;
  for (int cell = 0; cell < width * height; ++cell) {
    if (keep.count(cell)) continue;
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u < density) blocked.insert(cell);
  }
  return blocked;
}

namespace {

void dfs_paths(const Graph& g, int at, int d, std::vector<char>& visited,
               std::vector<int>& edges, std::vector<SimplePath>& out, int s) {
  if (at == d) {
    out.push_back({edges, s, d});
    return;
  }
  for (int var : g.incident_vars(at)) {
    int next = g.other_end(var, at);
    if (visited[next]) continue;
    visited[next] = 1;
    edges.push_back(var);
    dfs_paths(g, next, d, visited, edges, out, s);
    edges.pop_back();
    visited[next] = 0;
  }
}

bool dfs_reaches(const Graph& g, int at, int d, std::vector<char>& visited) {
  if (at == d) return true;
  for (int var : g.incident_vars(at)) {
    int next = g.other_end(var, at);
    if (visited[next]) continue;
    visited[next] = 1;
    if (dfs_reaches(g, next, d, visited)) return true;
    visited[next] = 0;
  }
  return false;
}

}  // namespace

std::vector<SimplePath> enumerate_simple_paths(const Graph& g, int s, int d) {
  if (s == d) throw std::invalid_argument("source equals destination");
  if (s < 0 || d < 0 || s >= g.num_vertices() || d >= g.num_vertices()) {
    throw std::invalid_argument("endpoint out of range");
  }
  std::vector<SimplePath> out;
  std::vector<char> visited(g.num_vertices(), 0);
  std::vector<int> edges;
  visited[s] = 1;
  dfs_paths(g, s, d, visited, edges, out, s);
  return out;
}

bool prefix_extends_to_path(const Graph& g, int s, int d,
                            const std::vector<int>& prefix_edges,
                            int extra_var) {
  std::vector<char> visited(g.num_vertices(), 0);
  int at = s;
  visited[at] = 1;
  for (int var : prefix_edges) {
    at = g.other_end(var, at);
    if (visited[at]) return false;
    visited[at] = 1;
  }
  if (extra_var >= 0) {
    at = g.other_end(extra_var, at);
    if (visited[at]) return false;
    visited[at] = 1;
  }
  if (at == d) {
    // The prefix already ends at d; it is a full path only if nothing
    // more is required, i.e. the prefix itself is the witness.
    return true;
  }
  return dfs_reaches(g, at, d, visited);
}

void write_graph(const Graph& g, std::ostream& os) {
  os << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (int var = 0; var < g.num_edges(); ++var) {
    os << g.edge(var).first << ' ' << g.edge(var).second << '\n';
  }
}

Graph read_graph(std::istream& is) {
  int v = 0, e = 0;
  if (!(is >> v >> e)) throw std::runtime_error("bad graph header");
  std::vector<std::pair<int, int>> edges(e);
  for (auto& ed : edges) {
    if (!(is >> ed.first >> ed.second)) {
      throw std::runtime_error("truncated graph file");
    }
  }
  return Graph(v, std::move(edges));
}

}  // namespace kcpath
