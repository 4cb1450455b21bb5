#include "kcpath/psdd.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace kcpath {

Psdd uniform_parameterize(const Diagram& dd) {
  if (dd.mgr == nullptr) throw std::invalid_argument("empty diagram handle");
  if (dd.is_false()) {
    throw std::invalid_argument(
        "cannot parameterize an unsatisfiable diagram: no distribution exists");
  }
  const DiagramManager& m = *dd.mgr;
  Psdd p;
  p.diagram = dd;
  p.theta.assign(m.size(), {0.0, 0.0});
  for (NodeId id = 4; id < m.size(); ++id) {
    const Node& n = m.node(id);
    bool hi_ok = n.hi != m.false_id();
    bool lo_ok = n.lo != m.false_id();
    if (hi_ok && lo_ok) {
      p.theta[id] = {0.5, 0.5};
    } else if (hi_ok) {
      p.theta[id] = {1.0, 0.0};
    } else {
      p.theta[id] = {0.0, 1.0};
    }
  }
  return p;
}

SimplePath sample_path(const Psdd& p, const Graph& g, int s, int d,
                       std::mt19937_64& rng) {
  const DiagramManager& m = *p.diagram.mgr;
  NodeId id = p.diagram.root;
  std::vector<int> positive;
  while (true) {
    const Node& n = m.node(id);
    if (n.kind == NodeKind::Decision) {
      int var = m.vtree().order[n.level];
      bool take_hi = uniform01(rng) < p.theta[id][0];
      if (take_hi) positive.push_back(var);
      id = take_hi ? n.hi : n.lo;
      continue;
    }
    int leaf_var = m.vtree().order[m.num_vars() - 1];
    if (n.kind == NodeKind::LitPos) {
      positive.push_back(leaf_var);
    } else if (n.kind == NodeKind::True) {
      if (uniform01(rng) < p.top_theta) positive.push_back(leaf_var);
    } else if (n.kind == NodeKind::False) {
      throw std::logic_error("sampled into a False sub");
    }
    break;
  }
  // Order the sampled edge set into a walk from s.
  SimplePath path;
  path.source = s;
  path.destination = d;
  int at = s;
  std::vector<char> used(positive.size(), 0);
  for (size_t step = 0; step < positive.size(); ++step) {
    bool advanced = false;
    for (size_t i = 0; i < positive.size(); ++i) {
      if (used[i]) continue;
      const auto& e = g.edge(positive[i]);
      if (e.first == at || e.second == at) {
        used[i] = 1;
        path.edges.push_back(positive[i]);
        at = g.other_end(positive[i], at);
        advanced = true;
        break;
      }
    }
    if (!advanced) throw std::logic_error("sampled model is not a path");
  }
  if (at != d) throw std::logic_error("sampled path does not end at d");
  return path;
}

double evidence_probability(const Psdd& p, const std::vector<int>& evidence) {
  const DiagramManager& m = *p.diagram.mgr;
  std::vector<char> ev(m.num_vars(), 0);
  for (int var : evidence) ev[var] = 1;
  int leaf_var = m.vtree().order[m.num_vars() - 1];
  size_t limit = p.theta.size();
  std::vector<double> val(limit, 0.0);
  val[m.false_id()] = 0.0;
  val[m.true_id()] = ev[leaf_var] ? p.top_theta : 1.0;
  val[m.lit_id(true)] = 1.0;
  val[m.lit_id(false)] = ev[leaf_var] ? 0.0 : 1.0;
  for (NodeId id = 4; id < limit; ++id) {
    const Node& n = m.node(id);
    double v = p.theta[id][0] * val[n.hi];
    if (!ev[m.vtree().order[n.level]]) v += p.theta[id][1] * val[n.lo];
    val[id] = v;
  }
  return val[p.diagram.root];
}

double conditional_probability(const Psdd& p, int query,
                               const std::vector<int>& evidence) {
  double den = evidence_probability(p, evidence);
  if (den <= 0.0) {
    throw std::invalid_argument("evidence has zero probability");
  }
  std::vector<int> both = evidence;
  both.push_back(query);
  return evidence_probability(p, both) / den;
}

double model_probability(const Psdd& p, const std::vector<int>& positive) {
  const DiagramManager& m = *p.diagram.mgr;
  std::vector<char> pos(m.num_vars(), 0);
  for (int var : positive) pos[var] = 1;
  NodeId id = p.diagram.root;
  double prob = 1.0;
  while (true) {
    const Node& n = m.node(id);
    if (n.kind == NodeKind::Decision) {
      bool hi = pos[m.vtree().order[n.level]];
      prob *= p.theta[id][hi ? 0 : 1];
      id = hi ? n.hi : n.lo;
      if (prob == 0.0) return 0.0;
      continue;
    }
    bool leaf_pos = pos[m.vtree().order[m.num_vars() - 1]];
    switch (n.kind) {
      case NodeKind::True:
        return prob * (leaf_pos ? p.top_theta : 1.0 - p.top_theta);
      case NodeKind::LitPos:
        return leaf_pos ? prob : 0.0;
      case NodeKind::LitNeg:
        return leaf_pos ? 0.0 : prob;
      default:
        return 0.0;
    }
  }
}

void write_psdd(const Psdd& p, std::ostream& os) {
  write_diagram(p.diagram, os);
  const DiagramManager& m = *p.diagram.mgr;
  std::vector<NodeId> order = reachable_postorder(p.diagram);
  std::unordered_map<NodeId, int> remap;
  for (NodeId id : order) remap[id] = static_cast<int>(remap.size());
  for (NodeId id : order) {
    if (m.node(id).kind != NodeKind::Decision) continue;
    os << "THETA " << remap[id] << ' ' << p.theta[id][0] << ' '
       << p.theta[id][1] << '\n';
  }
  os << "TOPTHETA " << p.top_theta << '\n';
}

Psdd read_psdd(DiagramManager& m, std::istream& is) {
  // The diagram section ends at its root line; THETA lines follow using
  // the same file-local ids, so the id map must be rebuilt here.
  std::unordered_map<int, NodeId> ids;
  std::string tok;
  int leaf_var = m.vtree().order[m.num_vars() - 1];
  NodeId root = m.false_id();
  bool have_root = false;
  while (!have_root && is >> tok) {
    if (tok == "root") {
      int r;
      if (!(is >> r) || !ids.count(r)) throw std::runtime_error("bad root line");
      root = ids[r];
      have_root = true;
      break;
    }
    int id = std::stoi(tok);
    std::string kind;
    if (!(is >> kind)) throw std::runtime_error("truncated psdd file");
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
      ids[id] = m.decision(level, ids.at(hi), ids.at(lo));
    } else {
      throw std::runtime_error("unknown node kind: " + kind);
    }
  }
  if (!have_root) throw std::runtime_error("psdd file missing root line");
  Psdd p;
  p.diagram = {&m, root};
  p.theta.assign(m.size(), {0.0, 0.0});
  while (is >> tok) {
    if (tok == "THETA") {
      int id;
      double hi, lo;
      is >> id >> hi >> lo;
      p.theta[ids.at(id)] = {hi, lo};
    } else if (tok == "TOPTHETA") {
      is >> p.top_theta;
    } else {
      throw std::runtime_error("unexpected token in psdd file: " + tok);
    }
  }
  return p;
}

}  // namespace kcpath
