#include "kcpath/diagram.hpp"

#include <algorithm>
#include <cassert>
#include <cstring>
#include <iostream>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace kcpath {

Vtree Vtree::right_linear(int num_vars) {
  Vtree vt;
  vt.order.resize(num_vars);
  vt.pos.resize(num_vars);
  for (int i = 0; i < num_vars; ++i) {
    vt.order[i] = i;
    vt.pos[i] = i;
  }
  return vt;
}

DiagramManager::DiagramManager(Vtree vt) : vtree_(std::move(vt)) {
  if (vtree_.num_vars() < 1) {
    throw std::invalid_argument("vtree needs at least one variable");
  }
  int leaf = vtree_.num_vars() - 1;
  nodes_.push_back({NodeKind::False, -1});
  nodes_.push_back({NodeKind::True, leaf});
  nodes_.push_back({NodeKind::LitPos, leaf});
  nodes_.push_back({NodeKind::LitNeg, leaf});
}

NodeId DiagramManager::decision(int level, NodeId hi, NodeId lo) {
  if (hi == false_id() && lo == false_id()) return false_id();
  assert(level >= 0 && level < vtree_.num_vars() - 1);
  uint64_t key = static_cast<uint64_t>(level);
  key = key * 0x9e3779b97f4a7c15ULL + hi;
  key = key * 0x9e3779b97f4a7c15ULL + lo;
  auto& bucket = unique_[key];
  for (NodeId id : bucket) {
    const Node& n = nodes_[id];
    if (n.level == level && n.hi == hi && n.lo == lo) return id;
  }
  NodeId id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({NodeKind::Decision, level, hi, lo});
  bucket.push_back(id);
  return id;
}

namespace {

// Frontier state for the top-down path compilation. `mate` is aligned
// with the static frontier vertex list of the current position:
//   mate == v   vertex untouched so far
//   mate == -1  vertex internal (degree 2)
//   mate == w   vertex is an endpoint of a fragment whose far end is w
//               (w may already have left the frontier when w is s or d)
struct FState {
  bool done = false;  // s-d path completed; all later edges must be false
  std::vector<int> mate;

  std::string key() const {
    std::string k(1, done ? 1 : 0);
    k.append(reinterpret_cast<const char*>(mate.data()),
             mate.size() * sizeof(int));
    return k;
  }
};

class PathCompiler {
 public:
  PathCompiler(DiagramManager& m, const Graph& g, int s, int d)
      : mgr_(m), g_(g), s_(s), d_(d) {
    const Vtree& vt = m.vtree();
    int n = vt.num_vars();
    first_.assign(g.num_vertices(), -1);
    last_.assign(g.num_vertices(), -1);
    for (int p = 0; p < n; ++p) {
      const auto& e = g.edge(vt.order[p]);
      for (int v : {e.first, e.second}) {
        if (first_[v] < 0) first_[v] = p;
        last_[v] = p;
      }
    }
    frontier_.resize(n);
    std::vector<int> active;
    for (int p = 0; p < n; ++p) {
      for (int v = 0; v < g.num_vertices(); ++v) {
        if (first_[v] == p) active.push_back(v);
      }
      std::sort(active.begin(), active.end());
      frontier_[p] = active;
      std::erase_if(active, [&](int v) { return last_[v] == p; });
    }
    memo_.resize(n);
  }

  NodeId run() {
    int n = mgr_.vtree().num_vars();
    if (n == 0) return mgr_.false_id();
    FState init;
    init.mate = frontier_[0];  // every entrant starts untouched
    return build(0, init);
  }

 private:
  int frontier_index(int p, int v) const {
    const auto& f = frontier_[p];
    auto it = std::lower_bound(f.begin(), f.end(), v);
    if (it == f.end() || *it != v) return -1;
    return static_cast<int>(it - f.begin());
  }

  // Applies edge `p` taken/skipped and the end-of-position frontier
  // bookkeeping; returns the state at position p+1, or nullopt if the
  // branch is inconsistent with the simple-path constraint.
  std::optional<FState> step(int p, const FState& in, bool take) {
    FState st = in;
    if (take) {
      if (st.done) return std::nullopt;
      const auto& e = g_.edge(mgr_.vtree().order[p]);
      int u = e.first, v = e.second;
      int iu = frontier_index(p, u), iv = frontier_index(p, v);
      int mu = st.mate[iu], mv = st.mate[iv];
      if (mu == -1 || mv == -1) return std::nullopt;       // degree > 2
      if ((u == s_ || u == d_) && mu != u) return std::nullopt;
      if ((v == s_ || v == d_) && mv != v) return std::nullopt;
      if (mu == v) return std::nullopt;                    // closes a cycle
      int a = mu, b = mv;  // endpoints of the merged fragment
      if (u != a) st.mate[iu] = -1;
      if (v != b) st.mate[iv] = -1;
      int ia = frontier_index(p, a), ib = frontier_index(p, b);
      if (ia >= 0) st.mate[ia] = b;
      if (ib >= 0) st.mate[ib] = a;
      if ((a == s_ && b == d_) || (a == d_ && b == s_)) {
        // Path complete; any other fragment can never be absorbed.
        const auto& f = frontier_[p];
        for (size_t i = 0; i < f.size(); ++i) {
          if (f[i] == a || f[i] == b) continue;
          if (st.mate[i] != f[i] && st.mate[i] != -1) return std::nullopt;
        }
        st.done = true;
        st.mate.clear();
      }
    }
    if (!st.done) {
      const auto& f = frontier_[p];
      for (size_t i = 0; i < f.size(); ++i) {
        int w = f[i];
        if (last_[w] != p) continue;
        if (w == s_ || w == d_) {
          if (st.mate[i] == w) return std::nullopt;  // endpoint stays bare
        } else {
          if (st.mate[i] != w && st.mate[i] != -1) return std::nullopt;
        }
      }
      if (p + 1 < mgr_.num_vars()) {
        std::vector<int> next;
        const auto& nf = frontier_[p + 1];
        next.reserve(nf.size());
        for (int w : nf) {
          int i = frontier_index(p, w);
          next.push_back(i < 0 ? w : st.mate[i]);
        }
        st.mate = std::move(next);
      } else {
        st.mate.clear();
      }
    }
    return st;
  }

  NodeId build(int p, const FState& state) {
    auto& tab = memo_[p];
    std::string key = state.key();
    if (auto it = tab.find(key); it != tab.end()) return it->second;
    NodeId result;
    int n = mgr_.num_vars();
    auto hi_state = step(p, state, true);
    auto lo_state = step(p, state, false);
    if (p == n - 1) {
      bool hi_acc = hi_state && hi_state->done;
      bool lo_acc = lo_state && lo_state->done;
      assert(!(hi_acc && lo_acc));
      if (hi_acc) {
        result = mgr_.lit_id(true);
      } else if (lo_acc) {
        result = mgr_.lit_id(false);
      } else {
        result = mgr_.false_id();
      }
      // A one-variable diagram has no decision nodes at all.
    } else {
      NodeId hi = hi_state ? build(p + 1, *hi_state) : mgr_.false_id();
      NodeId lo = lo_state ? build(p + 1, *lo_state) : mgr_.false_id();
      result = mgr_.decision(p, hi, lo);
    }
    tab.emplace(std::move(key), result);
    return result;
  }

  DiagramManager& mgr_;
  const Graph& g_;
  int s_, d_;
  std::vector<int> first_, last_;
  std::vector<std::vector<int>> frontier_;
  std::vector<std::unordered_map<std::string, NodeId>> memo_;
};

}  // namespace

Diagram compile_paths(DiagramManager& m, const Graph& g, int s, int d) {
  if (s == d) throw std::invalid_argument("source equals destination");
  if (s < 0 || d < 0 || s >= g.num_vertices() || d >= g.num_vertices()) {
    throw std::invalid_argument("endpoint out of range");
  }
  if (m.num_vars() != g.num_edges()) {
    throw std::invalid_argument("vtree does not cover the graph's edges");
  }
  if (g.num_edges() == 0) return {&m, m.false_id()};
  PathCompiler compiler(m, g, s, d);
  return {&m, compiler.run()};
}

uint64_t model_count(const Diagram& dd) {
  const DiagramManager& m = *dd.mgr;
  std::vector<uint64_t> memo(m.size(), UINT64_MAX);
  memo[m.false_id()] = 0;
  memo[m.true_id()] = 2;
  memo[m.lit_id(true)] = 1;
  memo[m.lit_id(false)] = 1;
  // Node ids are created children-first, so a single forward pass works.
  for (NodeId id = 4; id < m.size(); ++id) {
    const Node& n = m.node(id);
    memo[id] = memo[n.hi] + memo[n.lo];
  }
  return memo[dd.root];
}

namespace {

NodeId conjoin_rec(DiagramManager& m, NodeId a, NodeId b,
                   std::unordered_map<uint64_t, NodeId>& cache) {
  if (a == m.false_id() || b == m.false_id()) return m.false_id();
  if (a == m.true_id()) return b;
  if (b == m.true_id()) return a;
  if (a == b) return a;
  const Node& na = m.node(a);
  const Node& nb = m.node(b);
  if (na.kind != NodeKind::Decision || nb.kind != NodeKind::Decision) {
    // Distinct leaf literals: X and not-X.
    return m.false_id();
  }
  assert(na.level == nb.level);
  if (a > b) std::swap(a, b);
  uint64_t key = (static_cast<uint64_t>(a) << 32) | b;
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  NodeId hi = conjoin_rec(m, m.node(a).hi, m.node(b).hi, cache);
  NodeId lo = conjoin_rec(m, m.node(a).lo, m.node(b).lo, cache);
  NodeId r = m.decision(na.level, hi, lo);
  cache.emplace(key, r);
  return r;
}

}  // namespace

Diagram conjoin(const Diagram& a, const Diagram& b) {
  if (a.mgr == nullptr || b.mgr == nullptr) {
    throw std::invalid_argument("conjoin on empty diagram handle");
  }
  if (a.mgr != b.mgr) {
    throw std::invalid_argument("conjoin operands normalized for different vtrees");
  }
  std::unordered_map<uint64_t, NodeId> cache;
  return {a.mgr, conjoin_rec(*a.mgr, a.root, b.root, cache)};
}

Diagram top_diagram(DiagramManager& m) {
  NodeId cur = m.true_id();
  for (int level = m.num_vars() - 2; level >= 0; --level) {
    cur = m.decision(level, cur, cur);
  }
  return {&m, cur};
}

Diagram compile_landmark(DiagramManager& m, const Graph& g, int landmark) {
  if (landmark < 0 || landmark >= g.num_vertices()) {
    throw std::invalid_argument("landmark out of range");
  }
  const auto& incident = g.incident_vars(landmark);
  if (incident.empty()) {
    std::cerr << "warning: landmark vertex " << landmark
              << " has no incident edges; constraint is unsatisfiable\n";
    return {&m, m.false_id()};
  }
  std::vector<char> in_clause(m.num_vars(), 0);
  for (int var : incident) in_clause[m.vtree().pos[var]] = 1;
  int n = m.num_vars();
  // pending[level]: clause not yet satisfied at this level.
  NodeId sat = m.true_id();
  NodeId pending = in_clause[n - 1] ? m.lit_id(true) : m.false_id();
  for (int level = n - 2; level >= 0; --level) {
    NodeId next_sat = m.decision(level, sat, sat);
    NodeId next_pending = in_clause[level]
                              ? m.decision(level, sat, pending)
                              : m.decision(level, pending, pending);
    sat = next_sat;
    pending = next_pending;
  }
  return {&m, pending};
}

namespace {

void collect_models(const DiagramManager& m, NodeId id, std::vector<int>& acc,
                    std::vector<std::vector<int>>& out, int level) {
  if (id == m.false_id()) return;
  const Node& n = m.node(id);
  if (n.kind == NodeKind::Decision) {
    acc.push_back(m.vtree().order[level]);
    collect_models(m, n.hi, acc, out, level + 1);
    acc.pop_back();
    collect_models(m, n.lo, acc, out, level + 1);
    return;
  }
  int var = m.vtree().order[m.num_vars() - 1];
  if (n.kind == NodeKind::True || n.kind == NodeKind::LitPos) {
    acc.push_back(var);
    std::vector<int> model = acc;
    std::sort(model.begin(), model.end());
    out.push_back(std::move(model));
    acc.pop_back();
  }
  if (n.kind == NodeKind::True || n.kind == NodeKind::LitNeg) {
    std::vector<int> model = acc;
    std::sort(model.begin(), model.end());
    out.push_back(std::move(model));
  }
}

}  // namespace

std::vector<std::vector<int>> enumerate_models(const Diagram& dd) {
  std::vector<std::vector<int>> out;
  std::vector<int> acc;
  collect_models(*dd.mgr, dd.root, acc, out, 0);
  std::sort(out.begin(), out.end());
  return out;
}

bool evaluate(const Diagram& dd, const std::vector<char>& assignment) {
  const DiagramManager& m = *dd.mgr;
  NodeId id = dd.root;
  int level = 0;
  while (true) {
    if (id == m.false_id()) return false;
    const Node& n = m.node(id);
    switch (n.kind) {
      case NodeKind::True:
        return true;
      case NodeKind::LitPos:
        return assignment[m.vtree().order[m.num_vars() - 1]];
      case NodeKind::LitNeg:
        return !assignment[m.vtree().order[m.num_vars() - 1]];
      case NodeKind::Decision:
        id = assignment[m.vtree().order[level]] ? n.hi : n.lo;
        ++level;
        break;
      case NodeKind::False:
        return false;
    }
  }
}

std::vector<NodeId> reachable_postorder(const Diagram& dd) {
  const DiagramManager& m = *dd.mgr;
  std::vector<NodeId> order;
  std::unordered_map<NodeId, char> seen;
  auto visit = [&](auto&& self, NodeId id) -> void {
    if (seen.count(id)) return;
    seen[id] = 1;
    const Node& n = m.node(id);
    if (n.kind == NodeKind::Decision) {
      self(self, n.hi);
      self(self, n.lo);
    }
    order.push_back(id);
  };
  visit(visit, dd.root);
  return order;
}

void write_diagram(const Diagram& dd, std::ostream& os) {
  const DiagramManager& m = *dd.mgr;
  std::vector<NodeId> order = reachable_postorder(dd);
  std::unordered_map<NodeId, int> remap;
  for (NodeId id : order) remap[id] = static_cast<int>(remap.size());
  int leaf_var = m.vtree().order[m.num_vars() - 1];
  for (NodeId id : order) {
    const Node& n = m.node(id);
    os << remap[id] << ' ';
    switch (n.kind) {
      case NodeKind::False:
        os << "F\n";
        break;
      case NodeKind::True:
        os << "T\n";
        break;
      case NodeKind::LitPos:
        os << "LIT " << leaf_var + 1 << '\n';
        break;
      case NodeKind::LitNeg:
        os << "LIT " << -(leaf_var + 1) << '\n';
        break;
      case NodeKind::Decision:
        os << "DEC " << n.level << ' ' << remap[n.hi] << ' ' << remap[n.lo]
           << '\n';
        break;
    }
  }
  os << "root " << remap[dd.root] << '\n';
}

Diagram read_diagram(DiagramManager& m, std::istream& is) {
  std::unordered_map<int, NodeId> ids;
  std::string tok;
  int leaf_var = m.vtree().order[m.num_vars() - 1];
  NodeId root = m.false_id();
  while (is >> tok) {
    if (tok == "root") {
      int r;
      if (!(is >> r) || !ids.count(r)) throw std::runtime_error("bad root line");
      root = ids[r];
      return {&m, root};
    }
    int id = std::stoi(tok);
    std::string kind;
    if (!(is >> kind)) throw std::runtime_error("truncated diagram");
    if (kind == "F") {
      ids[id] = m.false_id();
    } else if (kind == "T") {
      ids[id] = m.true_id();
    } else if (kind == "LIT") {
      int lit;
      is >> lit;
      if (std::abs(lit) - 1 != leaf_var) {
        throw std::runtime_error("literal does not match vtree leaf");
      }
      ids[id] = m.lit_id(lit > 0);
    } else if (kind == "DEC") {
      int level, hi, lo;
      is >> level >> hi >> lo;
      if (!ids.count(hi) || !ids.count(lo)) {
        throw std::runtime_error("decision references unknown node");
      }
      ids[id] = m.decision(level, ids[hi], ids[lo]);
    } else {
      throw std::runtime_error("unknown node kind: " + kind);
    }
  }
  throw std::runtime_error("diagram file missing root line");
}

}  // namespace kcpath
