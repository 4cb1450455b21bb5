#pragma once

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "kcpath/graph.hpp"

namespace kcpath {

using NodeId = uint32_t;

// Right-linear vtree: a total variable order. Every internal vtree node's
// left child is a leaf, so position i in the order is the i-th leaf from
// the left and larger positions are deeper.
struct Vtree {
  std::vector<int> order;  // order[pos] = variable
  std::vector<int> pos;    // pos[var] = position

  static Vtree right_linear(int num_vars);
  int num_vars() const { return static_cast<int>(order.size()); }
  bool operator==(const Vtree&) const = default;
};

enum class NodeKind : uint8_t { False, True, LitPos, LitNeg, Decision };

// Decision nodes carry the canonical element list [(X, hi), (not X, lo)];
// literal/True terminals live at the deepest vtree position only, so a
// node's level fully determines which variable it tests.
struct Node {
  NodeKind kind;
  int level;  // vtree position this node is normalized for; -1 for False
  NodeId hi = 0;
  NodeId lo = 0;
};

// Node store with unique-node canonicalization. All diagrams sharing a
// manager are normalized for the manager's vtree; every path from a root
// to a terminal passes through one decision node per position, so model
// counts need no skipped-level corrections.
class DiagramManager {
 public:
  explicit DiagramManager(Vtree vt);

  const Vtree& vtree() const { return vtree_; }
  int num_vars() const { return vtree_.num_vars(); }

  NodeId false_id() const { return 0; }
  NodeId true_id() const { return 1; }
  NodeId lit_id(bool positive) const { return positive ? 2 : 3; }

  // Both subs False collapses to the False terminal.
  NodeId decision(int level, NodeId hi, NodeId lo);

  const Node& node(NodeId id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }

 private:
  Vtree vtree_;
  std::vector<Node> nodes_;
  std::unordered_map<uint64_t, std::vector<NodeId>> unique_;
};

struct Diagram {
  DiagramManager* mgr = nullptr;
  NodeId root = 0;

  bool is_false() const { return root == 0; }
};

// Compiles the Boolean formula "edge set is a simple s-d path" with a
// frontier-based top-down search keyed by (edge index, fragment-endpoint
// state). A disconnected pair yields the False diagram.
Diagram compile_paths(DiagramManager& m, const Graph& g, int s, int d);

// Number of satisfying assignments over the full variable set.
uint64_t model_count(const Diagram& dd);

// Standard recursive apply (AND) with caching. Throws if the operands
// come from managers with different vtrees.
Diagram conjoin(const Diagram& a, const Diagram& b);

// Diagram accepting every assignment.
Diagram top_diagram(DiagramManager& m);

// Disjunction of the landmark's incident-edge variables. An isolated
// landmark yields the False diagram (and a warning on stderr).
Diagram compile_landmark(DiagramManager& m, const Graph& g, int landmark);

// Enumerates all models as sorted positive-variable sets (test support;
// exponential, only sensible for small diagrams).
std::vector<std::vector<int>> enumerate_models(const Diagram& dd);

// Evaluates the diagram on a full assignment (bit i = variable i).
bool evaluate(const Diagram& dd, const std::vector<char>& assignment);

// Reachable nodes, children before parents; deterministic order.
std::vector<NodeId> reachable_postorder(const Diagram& dd);

// Line-oriented text serialization: one node per line "id kind payload",
// kinds T, F, LIT (signed variable), DEC (level hi lo); root last.
void write_diagram(const Diagram& dd, std::ostream& os);
Diagram read_diagram(DiagramManager& m, std::istream& is);

}  // namespace kcpath
