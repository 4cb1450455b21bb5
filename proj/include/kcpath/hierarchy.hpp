#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <tuple>
#include <vector>

#include "kcpath/nz.hpp"

namespace kcpath {

// Rectangular block partition of a grid map plus the induced cluster
// graph. Every base edge is internal to exactly one cluster or external
// between two adjacent clusters.
struct ClusterHierarchy {
  GridMap base;
  int clusters_x = 0, clusters_y = 0;
  std::vector<int> cluster_of;     // per base vertex
  std::vector<int> local_vertex;   // base vertex -> id within its cluster

  struct Cluster {
    std::vector<int> vertices;       // base ids, index = local id
    Graph graph{0, {}};              // internal edges only, local numbering
    std::vector<int> var_of_local;   // local edge var -> base edge var
  };
  std::vector<Cluster> clusters;

  Graph cluster_graph{0, {}};
  std::vector<std::vector<int>> crossing_vars;  // per cluster-graph edge var
  std::vector<int> pvar_of_edge;   // base edge var -> cluster edge var or -1

  int num_clusters() const { return static_cast<int>(clusters.size()); }
  int local_edge_var(int cluster, int base_var) const;
};

// Blocks are laid out row-major like cells; remainder blocks at the
// right/bottom edges are smaller. Throws if a cluster exceeds the grid.
ClusterHierarchy partition_grid(const GridMap& gm, int cluster_w,
                                int cluster_h);

// Two-level engine for one (s, d) pair: a compiled top-level diagram over
// the cluster graph plus lazily compiled intra-cluster units, one per
// (cluster, entry, exit) triple actually reached by a rollout.
class HierarchyEngine {
 public:
  struct Unit {
    std::unique_ptr<DiagramManager> mgr;
    Psdd psdd;
    SubContextTable tbl;
    bool empty = true;  // no entry->exit path inside the cluster
  };

  HierarchyEngine(ClusterHierarchy h, int s, int d);

  const ClusterHierarchy& hier() const { return h_; }
  int source() const { return s_; }
  int destination() const { return d_; }
  bool feasible() const;  // some hierarchical path exists from the start

  // Lazily compiled; the returned reference stays valid for the engine's
  // lifetime. Thread-safe (single-writer critical section).
  const Unit& unit(int cluster, int entry_local, int exit_local);

  const Psdd& top_psdd() const { return top_psdd_; }
  const SubContextTable& top_table() const { return top_tbl_; }

  ClusterHierarchy h_;
  int s_, d_;
  bool same_cluster_trip_;
  bool top_false_ = false;
  std::unique_ptr<DiagramManager> top_mgr_;
  Psdd top_psdd_;
  SubContextTable top_tbl_;
  std::map<std::tuple<int, int, int>, std::unique_ptr<Unit>> units_;
  std::mutex units_mu_;
};

// Rollout cursor. Candidates track, per plausible exit of the current
// cluster, the intra-cluster path state entered at entry_local; they are
// advanced in lockstep and dropped as intra moves rule their exit out.
struct HierState {
  PathState top;  // over the cluster graph; unused on same-cluster trips
  int current_cluster = -1;
  int entry_local = -1;
  int current_vertex = -1;       // base id
  std::vector<int> path;         // base edge vars in traversal order

  struct Candidate {
    int exit_local = -1;
    bool trivial = false;        // entry == exit: the empty intra path
    const HierarchyEngine::Unit* unit = nullptr;
    PathState st;
  };
  std::vector<Candidate> candidates;
};

// Generic mode answers every feasibility question with psdd conditional
// probabilities instead of the connectivity tables; both modes explore
// the identical state space (used by the timing benchmark).
enum class InferenceMode { kTables, kGeneric };

HierState init_hier_state(HierarchyEngine& e,
                          InferenceMode mode = InferenceMode::kTables);
std::vector<int> hierarchical_feas(HierarchyEngine& e, const HierState& hs,
                                   InferenceMode mode = InferenceMode::kTables);
void hierarchical_advance(HierarchyEngine& e, HierState& hs, int base_var,
                          InferenceMode mode = InferenceMode::kTables);

// Uniform-random masked rollout; returns the traversed path, or an empty
// edge list with destination -1 when stranded (possible only on maps with
// obstacles, where the hierarchy may omit every completing path).
SimplePath hier_rollout(HierarchyEngine& e, std::mt19937_64& rng,
                        InferenceMode mode = InferenceMode::kTables);

// All paths reachable by hierarchical rollouts (test support; exponential).
std::vector<std::vector<int>> enumerate_hier_paths(HierarchyEngine& e);

}  // namespace kcpath
