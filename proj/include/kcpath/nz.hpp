#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "kcpath/psdd.hpp"

namespace kcpath {

// Feasible sub-contexts of one variable X: every distinct conjunction of
// literals on a root-to-prime path whose prime is the positive literal X
// (the prime itself included). With a right-linear vtree such a
// conjunction fixes exactly the variables at vtree positions 0..pos(X),
// so it is stored as the bitmask of its positive literals; containment
// between sub-contexts is prefix equality on these masks.
struct SubContextSet {
  int var = -1;
  int depth = -1;        // vtree position of var
  int words = 0;         // 64-bit words per mask
  size_t count = 0;
  std::vector<uint64_t> bits;  // count * words, row-major; ids are rows

  std::span<const uint64_t> mask(size_t id) const {
    return {bits.data() + id * words, static_cast<size_t>(words)};
  }
};

// CSR rows: row(scID) lists the connected sub-context ids of the other
// variable of the pair, sorted ascending.
struct PairTable {
  std::vector<uint32_t> offsets;  // sset(first).count + 1 entries
  std::vector<uint32_t> data;

  std::span<const uint32_t> row(uint32_t scid) const {
    return {data.data() + offsets[scid],
            static_cast<size_t>(offsets[scid + 1] - offsets[scid])};
  }
};

// Pre-processed sub-contexts plus the pairwise connectivity lookup: for
// variables X, X' and sc in sset(X), connectivity (X,X')[sc] holds every
// sc' in sset(X') with sc' containing sc when X' is deeper, and every
// sc' contained in sc otherwise.
class SubContextTable {
 public:
  int num_vars() const { return static_cast<int>(ssets_.size()); }
  const Vtree& vtree() const { return vt_; }
  const SubContextSet& sset(int var) const { return ssets_[var]; }
  std::span<const uint32_t> connectivity(int x, int xp, uint32_t scid) const {
    return pairs_[static_cast<size_t>(x) * num_vars() + xp].row(scid);
  }
  bool deeper(int x, int y) const { return vt_.pos[x] > vt_.pos[y]; }

  Vtree vt_;
  std::vector<SubContextSet> ssets_;
  std::vector<PairTable> pairs_;  // num_vars * num_vars, diagonal unused
};

// Enumerates every feasible root-to-prime prefix of the diagram, grouped
// and deduplicated per variable. The deepest variable appears as a sub,
// not a prime; its entries come from the leaf terminals.
std::vector<SubContextSet> build_subcontext_sets(const Psdd& p);

// Connectivity via per-variable hashing of masks (each deeper sub-context
// matches at most one shallower one, its prefix); pairs are processed in
// parallel when OpenMP is enabled.
SubContextTable precompute_connectivity(std::vector<SubContextSet> ssets,
                                        const Vtree& vt);

// Reference implementation: the literal quadratic pairwise containment
// scan. Kept for testing and benchmarking against the fast kernel.
SubContextTable precompute_connectivity_serial(std::vector<SubContextSet> ssets,
                                               const Vtree& vt);

SubContextTable build_table(const Psdd& p);

// An agent's query cursor: the partial path, the vtree-deepest variable
// among its edges, and the surviving sub-context ids of that variable.
struct PathState {
  std::vector<int> path;          // edge variables in traversal order
  std::vector<char> on_path;      // indexed by edge variable
  int current_vertex = -1;
  int deepest_var = -1;           // -1 while the path is empty
  std::vector<uint32_t> surviving;
};

PathState init_state(const Graph& g, int source);

// True iff Pr(X_e = 1 | path literals) > 0, decided from the surviving
// sub-contexts and the connectivity table alone. Throws if e is not an
// unused edge at the current vertex.
bool nz_query(const PathState& st, int edge_var, const Graph& g,
              const SubContextTable& tbl);

// The feasible next edges at the current vertex, sorted ascending.
std::vector<int> feas(const PathState& st, const Graph& g,
                      const SubContextTable& tbl);

// Extends the path by edge_var. Throws std::logic_error when called with
// an edge whose nz_query is false.
void advance(PathState& st, int edge_var, const Graph& g,
             const SubContextTable& tbl);

// Binary cache of a table (sset masks + connectivity), keyed externally.
void write_table(const SubContextTable& tbl, std::ostream& os);
SubContextTable read_table(std::istream& is);

}  // namespace kcpath
