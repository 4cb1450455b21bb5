#include "kcpath/nz.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace kcpath {

namespace {

int words_for(int bits) { return (bits + 63) / 64; }

// Prefix equality of `deep` restricted to positions 0..shallow_depth
// against `shallow` ("sc contains every literal of sc'").
bool contains_prefix(std::span<const uint64_t> deep,
                     std::span<const uint64_t> shallow, int shallow_depth) {
  int w = words_for(shallow_depth + 1);
  for (int i = 0; i + 1 < w; ++i) {
    if (deep[i] != shallow[i]) return false;
  }
  int rem = shallow_depth % 64;
  uint64_t m = rem == 63 ? ~0ULL : ((1ULL << (rem + 1)) - 1);
  return (deep[w - 1] & m) == shallow[w - 1];
}

}  // namespace

std::vector<SubContextSet> build_subcontext_sets(const Psdd& p) {
  const DiagramManager& m = *p.diagram.mgr;
  int n = m.num_vars();
  int words = words_for(n);
  const Vtree& vt = m.vtree();

  // Per-variable mask collections; masks are byte strings of `words`
  // little-endian words for cheap dedup.
  std::vector<std::unordered_set<std::string>> collected(n);
  size_t mask_bytes = static_cast<size_t>(words) * 8;

  auto with_bit = [&](const std::string& mask, int pos) {
    std::string out = mask;
    uint64_t w;
    std::memcpy(&w, out.data() + (pos / 64) * 8, 8);
    w |= 1ULL << (pos % 64);
    std::memcpy(out.data() + (pos / 64) * 8, &w, 8);
    return out;
  };

  std::unordered_map<NodeId, std::unordered_set<std::string>> cur;
  if (m.node(p.diagram.root).kind != NodeKind::False) {
    cur[p.diagram.root].insert(std::string(mask_bytes, '\0'));
  }
  for (int level = 0; level < n && !cur.empty(); ++level) {
    int var = vt.order[level];
    std::unordered_map<NodeId, std::unordered_set<std::string>> next;
    for (auto& [id, masks] : cur) {
      const Node& node = m.node(id);
      if (node.kind == NodeKind::Decision) {
        bool hi_ok = node.hi != m.false_id();
        bool lo_ok = node.lo != m.false_id();
        for (const auto& mask : masks) {
          if (hi_ok) {
            std::string pos_mask = with_bit(mask, level);
            collected[var].insert(pos_mask);
            next[node.hi].insert(std::move(pos_mask));
          }
          if (lo_ok) next[node.lo].insert(mask);
        }
      } else {
        // Leaf terminal: the deepest variable occurs as a sub, and its
        // positive occurrences still contribute sub-contexts.
        if (node.kind == NodeKind::LitPos || node.kind == NodeKind::True) {
          for (const auto& mask : masks) {
            collected[var].insert(with_bit(mask, level));
          }
        }
      }
    }
    cur = std::move(next);
  }

  std::vector<SubContextSet> out(n);
  for (int var = 0; var < n; ++var) {
    SubContextSet& s = out[var];
    s.var = var;
    s.depth = vt.pos[var];
    s.words = words;
    std::vector<std::string> rows(collected[var].begin(), collected[var].end());
    std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
      for (int w = words - 1; w >= 0; --w) {
        uint64_t wa, wb;
        std::memcpy(&wa, a.data() + w * 8, 8);
        std::memcpy(&wb, b.data() + w * 8, 8);
        if (wa != wb) return wa < wb;
      }
      return false;
    });
    s.count = rows.size();
    s.bits.resize(s.count * words);
    for (size_t i = 0; i < rows.size(); ++i) {
      std::memcpy(s.bits.data() + i * words, rows[i].data(), mask_bytes);
    }
  }
  return out;
}

namespace {

void flatten_rows(const std::vector<std::vector<uint32_t>>& rows,
                  PairTable& out) {
  out.offsets.assign(rows.size() + 1, 0);
  size_t total = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    total += rows[i].size();
    out.offsets[i + 1] = static_cast<uint32_t>(total);
  }
  out.data.reserve(total);
  for (const auto& r : rows) {
    out.data.insert(out.data.end(), r.begin(), r.end());
  }
}

}  // namespace

SubContextTable precompute_connectivity(std::vector<SubContextSet> ssets,
                                        const Vtree& vt) {
  SubContextTable tbl;
  tbl.vt_ = vt;
  int n = static_cast<int>(ssets.size());
  tbl.pairs_.resize(static_cast<size_t>(n) * n);
  tbl.ssets_ = std::move(ssets);

  // Order variables shallow-to-deep; each unordered pair is handled once
  // by its shallower member, which owns both directed tables of the pair.
  std::vector<int> by_depth(n);
  for (int v = 0; v < n; ++v) by_depth[vt.pos[v]] = v;

#pragma omp parallel for schedule(dynamic)
  for (int pi = 0; pi < n; ++pi) {
    int x = by_depth[pi];
    const SubContextSet& sx = tbl.ssets_[x];
    int wx = words_for(sx.depth + 1);
    int rem = sx.depth % 64;
    uint64_t last_mask = rem == 63 ? ~0ULL : ((1ULL << (rem + 1)) - 1);

    std::unordered_map<std::string, uint32_t> index;
    index.reserve(sx.count * 2);
    for (uint32_t id = 0; id < sx.count; ++id) {
      index.emplace(std::string(reinterpret_cast<const char*>(
                                    sx.bits.data() + id * sx.words),
                                static_cast<size_t>(wx) * 8),
                    id);
    }

    std::string key(static_cast<size_t>(wx) * 8, '\0');
    for (int pj = pi + 1; pj < n; ++pj) {
      int xp = by_depth[pj];
      const SubContextSet& sp = tbl.ssets_[xp];
      std::vector<std::vector<uint32_t>> fwd(sx.count);
      std::vector<uint32_t> rev_offsets(sp.count + 1, 0);
      std::vector<uint32_t> rev_data;
      for (uint32_t spid = 0; spid < sp.count; ++spid) {
        const uint64_t* mask = sp.bits.data() + spid * sp.words;
        std::memcpy(key.data(), mask, static_cast<size_t>(wx) * 8);
        uint64_t w;
        std::memcpy(&w, key.data() + (wx - 1) * 8, 8);
        w &= last_mask;
        std::memcpy(key.data() + (wx - 1) * 8, &w, 8);
        auto it = index.find(key);
        rev_offsets[spid + 1] = rev_offsets[spid];
        if (it != index.end()) {
          fwd[it->second].push_back(spid);
          rev_data.push_back(it->second);
          ++rev_offsets[spid + 1];
        }
      }
      flatten_rows(fwd, tbl.pairs_[static_cast<size_t>(x) * n + xp]);
      PairTable& rev = tbl.pairs_[static_cast<size_t>(xp) * n + x];
      rev.offsets = std::move(rev_offsets);
      rev.data = std::move(rev_data);
    }
  }
  return tbl;
}

SubContextTable precompute_connectivity_serial(std::vector<SubContextSet> ssets,
                                               const Vtree& vt) {
  SubContextTable tbl;
  tbl.vt_ = vt;
  int n = static_cast<int>(ssets.size());
  tbl.pairs_.resize(static_cast<size_t>(n) * n);
  tbl.ssets_ = std::move(ssets);
  for (int x = 0; x < n; ++x) {
    const SubContextSet& sx = tbl.ssets_[x];
    for (int xp = 0; xp < n; ++xp) {
      if (xp == x) continue;
      const SubContextSet& sp = tbl.ssets_[xp];
      std::vector<std::vector<uint32_t>> rows(sx.count);
      if (vt.pos[xp] > vt.pos[x]) {
        for (uint32_t i = 0; i < sx.count; ++i) {
          for (uint32_t j = 0; j < sp.count; ++j) {
            if (contains_prefix(sp.mask(j), sx.mask(i), sx.depth)) {
              rows[i].push_back(j);
            }
          }
        }
      } else {
        for (uint32_t i = 0; i < sx.count; ++i) {
          for (uint32_t j = 0; j < sp.count; ++j) {
            if (contains_prefix(sx.mask(i), sp.mask(j), sp.depth)) {
              rows[i].push_back(j);
            }
          }
        }
      }
      flatten_rows(rows, tbl.pairs_[static_cast<size_t>(x) * n + xp]);
    }
  }
  return tbl;
}

SubContextTable build_table(const Psdd& p) {
  return precompute_connectivity(build_subcontext_sets(p),
                                 p.diagram.mgr->vtree());
}

PathState init_state(const Graph& g, int source) {
  if (source < 0 || source >= g.num_vertices()) {
    throw std::invalid_argument("source out of range");
  }
  PathState st;
  st.current_vertex = source;
  st.on_path.assign(g.num_edges(), 0);
  return st;
}

bool nz_query(const PathState& st, int edge_var, const Graph& g,
              const SubContextTable& tbl) {
  const auto& e = g.edge(edge_var);
  if (e.first != st.current_vertex && e.second != st.current_vertex) {
    throw std::invalid_argument("edge not incident to the current vertex");
  }
  if (st.on_path[edge_var]) {
    throw std::invalid_argument("edge already on the path");
  }
  if (st.path.empty()) {
    return tbl.sset(edge_var).count > 0;
  }
  for (uint32_t id : st.surviving) {
    if (!tbl.connectivity(st.deepest_var, edge_var, id).empty()) return true;
  }
  return false;
}

std::vector<int> feas(const PathState& st, const Graph& g,
                      const SubContextTable& tbl) {
  std::vector<int> out;
  for (int var : g.incident_vars(st.current_vertex)) {
    if (st.on_path[var]) continue;
    if (nz_query(st, var, g, tbl)) out.push_back(var);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void advance(PathState& st, int edge_var, const Graph& g,
             const SubContextTable& tbl) {
  if (!nz_query(st, edge_var, g, tbl)) {
    throw std::logic_error("advance on an infeasible edge");
  }
  if (st.path.empty()) {
    st.deepest_var = edge_var;
    st.surviving.resize(tbl.sset(edge_var).count);
    for (uint32_t i = 0; i < st.surviving.size(); ++i) st.surviving[i] = i;
  } else if (tbl.deeper(edge_var, st.deepest_var)) {
    std::vector<uint32_t> merged;
    for (uint32_t id : st.surviving) {
      auto row = tbl.connectivity(st.deepest_var, edge_var, id);
      merged.insert(merged.end(), row.begin(), row.end());
    }
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    st.deepest_var = edge_var;
    st.surviving = std::move(merged);
  } else {
    std::erase_if(st.surviving, [&](uint32_t id) {
      return tbl.connectivity(st.deepest_var, edge_var, id).empty();
    });
  }
  st.path.push_back(edge_var);
  st.on_path[edge_var] = 1;
  st.current_vertex = g.other_end(edge_var, st.current_vertex);
}

namespace {

template <typename T>
void write_vec(std::ostream& os, const std::vector<T>& v) {
  uint64_t n = v.size();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  os.write(reinterpret_cast<const char*>(v.data()), n * sizeof(T));
}

template <typename T>
std::vector<T> read_vec(std::istream& is) {
  uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  std::vector<T> v(n);
  is.read(reinterpret_cast<char*>(v.data()), n * sizeof(T));
  if (!is) throw std::runtime_error("truncated table cache");
  return v;
}

constexpr uint32_t kTableMagic = 0x5343544bu;  // "KTCS"

}  // namespace

void write_table(const SubContextTable& tbl, std::ostream& os) {
  os.write(reinterpret_cast<const char*>(&kTableMagic), sizeof(kTableMagic));
  int n = tbl.num_vars();
  os.write(reinterpret_cast<const char*>(&n), sizeof(n));
  write_vec(os, tbl.vt_.order);
  for (const auto& s : tbl.ssets_) {
    os.write(reinterpret_cast<const char*>(&s.var), sizeof(s.var));
    os.write(reinterpret_cast<const char*>(&s.depth), sizeof(s.depth));
    os.write(reinterpret_cast<const char*>(&s.words), sizeof(s.words));
    uint64_t c = s.count;
    os.write(reinterpret_cast<const char*>(&c), sizeof(c));
    write_vec(os, s.bits);
  }
  for (const auto& p : tbl.pairs_) {
    write_vec(os, p.offsets);
    write_vec(os, p.data);
  }
}

SubContextTable read_table(std::istream& is) {
  uint32_t magic = 0;
  is.read(reinterpret_cast<char*>(&magic), sizeof(magic));
  if (magic != kTableMagic) throw std::runtime_error("not a table cache file");
  int n = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof(n));
  SubContextTable tbl;
  tbl.vt_.order = read_vec<int>(is);
  tbl.vt_.pos.resize(n);
  for (int p = 0; p < n; ++p) tbl.vt_.pos[tbl.vt_.order[p]] = p;
  tbl.ssets_.resize(n);
  for (auto& s : tbl.ssets_) {
    is.read(reinterpret_cast<char*>(&s.var), sizeof(s.var));
    is.read(reinterpret_cast<char*>(&s.depth), sizeof(s.depth));
    is.read(reinterpret_cast<char*>(&s.words), sizeof(s.words));
    uint64_t c = 0;
    is.read(reinterpret_cast<char*>(&c), sizeof(c));
    s.count = c;
    s.bits = read_vec<uint64_t>(is);
  }
  tbl.pairs_.resize(static_cast<size_t>(n) * n);
  for (auto& p : tbl.pairs_) {
    p.offsets = read_vec<uint32_t>(is);
    p.data = read_vec<uint32_t>(is);
  }
  return tbl;
}

}  // namespace kcpath
