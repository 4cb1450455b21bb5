#include "kcpath/hierarchy.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace kcpath {

int ClusterHierarchy::local_edge_var(int cluster, int base_var) const {
  const auto& [a, b] = base.graph.edge(base_var);
  if (cluster_of[a] != cluster || cluster_of[b] != cluster) {
    throw std::invalid_argument("edge is not internal to the cluster");
  }
  return clusters[cluster].graph.edge_var(local_vertex[a], local_vertex[b]);
}

ClusterHierarchy partition_grid(const GridMap& gm, int cluster_w,
                                int cluster_h) {
  if (cluster_w <= 0 || cluster_h <= 0) {
    throw std::invalid_argument("cluster dimensions must be positive");
  }
  if (cluster_w > gm.width || cluster_h > gm.height) {
    throw std::invalid_argument("cluster larger than the grid");
  }
  ClusterHierarchy h;
  h.base = gm;
  h.clusters_x = (gm.width + cluster_w - 1) / cluster_w;
  h.clusters_y = (gm.height + cluster_h - 1) / cluster_h;
  h.clusters.resize(static_cast<size_t>(h.clusters_x) * h.clusters_y);
  int nv = gm.graph.num_vertices();
  h.cluster_of.resize(nv);
  h.local_vertex.resize(nv);
  for (int v = 0; v < nv; ++v) {
    int cell = gm.vertex_to_cell[v];
    int cx = (cell % gm.width) / cluster_w;
    int cy = (cell / gm.width) / cluster_h;
    int c = cy * h.clusters_x + cx;
    h.cluster_of[v] = c;
    h.local_vertex[v] = static_cast<int>(h.clusters[c].vertices.size());
    h.clusters[c].vertices.push_back(v);
  }
  // Internal edges per cluster (local numbering) and the cluster graph.
  std::set<std::pair<int, int>> cluster_pairs;
  std::vector<std::vector<std::pair<int, int>>> local_edges(h.clusters.size());
  for (int bv = 0; bv < gm.graph.num_edges(); ++bv) {
    const auto& [a, b] = gm.graph.edge(bv);
    int ca = h.cluster_of[a], cb = h.cluster_of[b];
    if (ca == cb) {
      local_edges[ca].push_back({h.local_vertex[a], h.local_vertex[b]});
    } else {
      cluster_pairs.insert({std::min(ca, cb), std::max(ca, cb)});
    }
  }
  for (size_t c = 0; c < h.clusters.size(); ++c) {
    auto& cl = h.clusters[c];
    cl.graph = Graph(static_cast<int>(cl.vertices.size()),
                     std::move(local_edges[c]));
    cl.var_of_local.resize(cl.graph.num_edges());
    for (int lv = 0; lv < cl.graph.num_edges(); ++lv) {
      const auto& [la, lb] = cl.graph.edge(lv);
      cl.var_of_local[lv] =
          gm.graph.edge_var(cl.vertices[la], cl.vertices[lb]);
    }
  }
  h.cluster_graph = Graph(h.num_clusters(),
                          {cluster_pairs.begin(), cluster_pairs.end()});
  h.crossing_vars.resize(h.cluster_graph.num_edges());
  h.pvar_of_edge.assign(gm.graph.num_edges(), -1);
  for (int bv = 0; bv < gm.graph.num_edges(); ++bv) {
    const auto& [a, b] = gm.graph.edge(bv);
    int ca = h.cluster_of[a], cb = h.cluster_of[b];
    if (ca == cb) continue;
    int pe = h.cluster_graph.edge_var(ca, cb);
    h.pvar_of_edge[bv] = pe;
    h.crossing_vars[pe].push_back(bv);
  }
  return h;
}

HierarchyEngine::HierarchyEngine(ClusterHierarchy h, int s, int d)
    : h_(std::move(h)), s_(s), d_(d) {
  same_cluster_trip_ = h_.cluster_of[s_] == h_.cluster_of[d_];
  if (!same_cluster_trip_) {
    top_mgr_ = std::make_unique<DiagramManager>(
        Vtree::right_linear(h_.cluster_graph.num_edges()));
    Diagram dd = compile_paths(*top_mgr_, h_.cluster_graph, h_.cluster_of[s_],
                               h_.cluster_of[d_]);
    if (dd.is_false()) {
      top_false_ = true;
    } else {
      top_psdd_ = uniform_parameterize(dd);
      top_tbl_ = build_table(top_psdd_);
    }
  }
}

const HierarchyEngine::Unit& HierarchyEngine::unit(int cluster, int entry_local,
                                                   int exit_local) {
  std::lock_guard<std::mutex> lock(units_mu_);
  auto key = std::make_tuple(cluster, entry_local, exit_local);
  auto it = units_.find(key);
  if (it != units_.end()) return *it->second;
  auto u = std::make_unique<Unit>();
  const auto& cl = h_.clusters[cluster];
  if (cl.graph.num_edges() > 0) {
    u->mgr = std::make_unique<DiagramManager>(
        Vtree::right_linear(cl.graph.num_edges()));
    Diagram dd = compile_paths(*u->mgr, cl.graph, entry_local, exit_local);
    if (!dd.is_false()) {
      u->psdd = uniform_parameterize(dd);
      u->tbl = build_table(u->psdd);
      u->empty = false;
    }
  }
  return *units_.emplace(key, std::move(u)).first->second;
}

namespace {

// Feasibility of one more edge from a path state, by tables or by the
// psdd's conditional probability (benchmark mode). False rather than a
// throw for non-incident / used edges.
bool state_edge_feasible(const PathState& st, int var, const Graph& g,
                         const SubContextTable& tbl, const Psdd& p,
                         InferenceMode mode) {
  const auto& [a, b] = g.edge(var);
  if (a != st.current_vertex && b != st.current_vertex) return false;
  if (st.on_path[var]) return false;
  if (mode == InferenceMode::kTables) return nz_query(st, var, g, tbl);
  return conditional_probability(p, var, st.path) > 0.0;
}

void state_advance(PathState& st, int var, const Graph& g,
                   const SubContextTable& tbl, InferenceMode mode) {
  if (mode == InferenceMode::kTables) {
    advance(st, var, g, tbl);
    return;
  }
  st.path.push_back(var);
  st.on_path[var] = 1;
  st.current_vertex = g.other_end(var, st.current_vertex);
}

std::vector<int> feas_top(HierarchyEngine& e, const PathState& top,
                          InferenceMode mode) {
  if (e.top_false_) return {};
  const Graph& gp = e.hier().cluster_graph;
  if (mode == InferenceMode::kTables) return feas(top, gp, e.top_table());
  std::vector<int> out;
  for (int pe : gp.incident_vars(top.current_vertex)) {
    if (state_edge_feasible(top, pe, gp, e.top_table(), e.top_psdd(), mode)) {
      out.push_back(pe);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Exit vertices worth tracking in the current cluster: the destination
// (when housed here), else every boundary endpoint of a top-feasible
// cluster transition.
std::set<int> candidate_exits(HierarchyEngine& e, const HierState& hs,
                              InferenceMode mode) {
  const auto& h = e.hier();
  int c = hs.current_cluster;
  std::set<int> exits;
  if (c == h.cluster_of[e.destination()]) {
    exits.insert(h.local_vertex[e.destination()]);
    return exits;
  }
  for (int pe : feas_top(e, hs.top, mode)) {
    for (int bv : h.crossing_vars[pe]) {
      const auto& [a, b] = h.base.graph.edge(bv);
      int w = h.cluster_of[a] == c ? a : b;
      exits.insert(h.local_vertex[w]);
    }
  }
  return exits;
}

void build_candidates(HierarchyEngine& e, HierState& hs, InferenceMode mode) {
  hs.candidates.clear();
  if (hs.current_vertex == e.destination()) return;
  const auto& h = e.hier();
  const auto& cl = h.clusters[hs.current_cluster];
  for (int exit_local : candidate_exits(e, hs, mode)) {
    HierState::Candidate cand;
    cand.exit_local = exit_local;
    if (exit_local == hs.entry_local) {
      cand.trivial = true;
    } else {
      const auto& u = e.unit(hs.current_cluster, hs.entry_local, exit_local);
      if (u.empty) continue;
      cand.unit = &u;
      cand.st = init_state(cl.graph, hs.entry_local);
    }
    hs.candidates.push_back(std::move(cand));
  }
}

// One-step lookahead: would entering cluster_of(v) at v (after taking
// the cluster-graph edge pe) leave at least one viable candidate?
bool entry_viable(HierarchyEngine& e, const HierState& hs, int pe, int v,
                  InferenceMode mode) {
  if (v == e.destination()) return true;
  const auto& h = e.hier();
  int c2 = h.cluster_of[v];
  int lv = h.local_vertex[v];
  PathState top2 = hs.top;
  state_advance(top2, pe, h.cluster_graph, e.top_table(), mode);
  if (c2 == h.cluster_of[e.destination()]) {
    return !e.unit(c2, lv, h.local_vertex[e.destination()]).empty;
  }
  for (int pe2 : feas_top(e, top2, mode)) {
    for (int bv2 : h.crossing_vars[pe2]) {
      const auto& [a, b] = h.base.graph.edge(bv2);
      int w = h.cluster_of[a] == c2 ? a : b;
      int lw = h.local_vertex[w];
      if (lw == lv || !e.unit(c2, lv, lw).empty) return true;
    }
  }
  return false;
}

bool at_complete_exit(const ClusterHierarchy& h, const HierState& hs) {
  int lc = h.local_vertex[hs.current_vertex];
  for (const auto& cand : hs.candidates) {
    // An alive candidate sitting on its exit has traversed a full
    // entry->exit path (a proper superset of a simple path between the
    // same endpoints is never simple), so presence implies completion.
    if (cand.exit_local == lc) return true;
  }
  return false;
}

}  // namespace

HierState init_hier_state(HierarchyEngine& e, InferenceMode mode) {
  const auto& h = e.hier();
  HierState hs;
  hs.current_cluster = h.cluster_of[e.source()];
  hs.entry_local = h.local_vertex[e.source()];
  hs.current_vertex = e.source();
  if (!e.same_cluster_trip_) {
    if (e.top_false_) return hs;
    hs.top = init_state(h.cluster_graph, hs.current_cluster);
  }
  build_candidates(e, hs, mode);
  return hs;
}

std::vector<int> hierarchical_feas(HierarchyEngine& e, const HierState& hs,
                                   InferenceMode mode) {
  std::vector<int> out;
  if (hs.current_vertex == e.destination()) return out;
  const auto& h = e.hier();
  const auto& cl = h.clusters[hs.current_cluster];
  std::set<int> found;
  for (const auto& cand : hs.candidates) {
    if (cand.trivial) continue;
    for (int lv : cl.graph.incident_vars(cand.st.current_vertex)) {
      if (state_edge_feasible(cand.st, lv, cl.graph, cand.unit->tbl,
                              cand.unit->psdd, mode)) {
        found.insert(cl.var_of_local[lv]);
      }
    }
  }
  if (!e.same_cluster_trip_ && at_complete_exit(h, hs)) {
    for (int bv : h.base.graph.incident_vars(hs.current_vertex)) {
      int pe = h.pvar_of_edge[bv];
      if (pe < 0) continue;
      if (!state_edge_feasible(hs.top, pe, h.cluster_graph, e.top_table(),
                               e.top_psdd(), mode)) {
        continue;
      }
      int v = h.base.graph.other_end(bv, hs.current_vertex);
      if (entry_viable(e, hs, pe, v, mode)) found.insert(bv);
    }
  }
  out.assign(found.begin(), found.end());
  return out;
}

void hierarchical_advance(HierarchyEngine& e, HierState& hs, int base_var,
                          InferenceMode mode) {
  const auto& h = e.hier();
  int pe = h.pvar_of_edge[base_var];
  if (pe < 0) {
    // Intra-cluster move: advance every candidate it keeps alive.
    const auto& cl = h.clusters[hs.current_cluster];
    int lv = h.local_edge_var(hs.current_cluster, base_var);
    std::vector<HierState::Candidate> next;
    for (auto& cand : hs.candidates) {
      if (cand.trivial) continue;  // the empty-path exit is ruled out
      if (state_edge_feasible(cand.st, lv, cl.graph, cand.unit->tbl,
                              cand.unit->psdd, mode)) {
        state_advance(cand.st, lv, cl.graph, cand.unit->tbl, mode);
        next.push_back(std::move(cand));
      }
    }
    if (next.empty()) {
      throw std::logic_error("advance on an infeasible intra-cluster edge");
    }
    hs.candidates = std::move(next);
    hs.current_vertex = h.base.graph.other_end(base_var, hs.current_vertex);
    hs.path.push_back(base_var);
    return;
  }
  // Cluster transition.
  int v = h.base.graph.other_end(base_var, hs.current_vertex);
  if (e.same_cluster_trip_ || !at_complete_exit(h, hs) ||
      !state_edge_feasible(hs.top, pe, h.cluster_graph, e.top_table(),
                           e.top_psdd(), mode) ||
      !entry_viable(e, hs, pe, v, mode)) {
    throw std::logic_error("advance on an infeasible cluster transition");
  }
  state_advance(hs.top, pe, h.cluster_graph, e.top_table(), mode);
  hs.current_cluster = h.cluster_of[v];
  hs.entry_local = h.local_vertex[v];
  hs.current_vertex = v;
  hs.path.push_back(base_var);
  build_candidates(e, hs, mode);
}

bool HierarchyEngine::feasible() const {
  auto& self = const_cast<HierarchyEngine&>(*this);
  if (s_ == d_) return true;
  if (!same_cluster_trip_ && top_false_) return false;
  HierState hs = init_hier_state(self);
  return !hierarchical_feas(self, hs).empty();
}

SimplePath hier_rollout(HierarchyEngine& e, std::mt19937_64& rng,
                        InferenceMode mode) {
  HierState hs = init_hier_state(e, mode);
  SimplePath p;
  p.source = e.source();
  p.destination = e.destination();
  while (hs.current_vertex != e.destination()) {
    std::vector<int> f = hierarchical_feas(e, hs, mode);
    if (f.empty()) {
      p.destination = -1;  // stranded
      return p;
    }
    hierarchical_advance(e, hs, f[rng() % f.size()], mode);
  }
  p.edges = hs.path;
  return p;
}

namespace {

void enum_rec(HierarchyEngine& e, const HierState& hs,
              std::vector<std::vector<int>>& out) {
  if (hs.current_vertex == e.destination()) {
    out.push_back(hs.path);
    return;
  }
  for (int bv : hierarchical_feas(e, hs)) {
    HierState next = hs;
    hierarchical_advance(e, next, bv);
    enum_rec(e, next, out);
  }
}

}  // namespace

std::vector<std::vector<int>> enumerate_hier_paths(HierarchyEngine& e) {
  std::vector<std::vector<int>> out;
  HierState hs = init_hier_state(e);
  enum_rec(e, hs, out);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kcpath
