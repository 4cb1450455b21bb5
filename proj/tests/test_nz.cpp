#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "kcpath/nz.hpp"

using namespace kcpath;

namespace {

// Edge variables of the 5-vertex example: A=0 B=1 C=2 D=3 E=4.
Graph g5() { return Graph(5, {{0, 1}, {1, 2}, {1, 3}, {2, 3}, {3, 4}}); }

struct Setup {
  DiagramManager m;
  Psdd p;
  SubContextTable tbl;
  Setup(const Graph& g, int s, int d)
      : m(Vtree::right_linear(g.num_edges())),
        p(uniform_parameterize(compile_paths(m, g, s, d))),
        tbl(build_table(p)) {}
};

std::vector<int> mask_to_vars(std::span<const uint64_t> mask, int n) {
  std::vector<int> out;
  for (int v = 0; v < n; ++v) {
    if (mask[v / 64] >> (v % 64) & 1) out.push_back(v);
  }
  return out;
}

bool tables_equal(const SubContextTable& a, const SubContextTable& b) {
  int n = a.num_vars();
  if (n != b.num_vars()) return false;
  for (int i = 0; i < n * n; ++i) {
    if (a.pairs_[i].offsets != b.pairs_[i].offsets) return false;
    if (a.pairs_[i].data != b.pairs_[i].data) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("sub-context sets of the example graph") {
  Graph g = g5();
  Setup s(g, 0, 4);
  // sset(A) = {A}
  REQUIRE(s.tbl.sset(0).count == 1);
  CHECK(mask_to_vars(s.tbl.sset(0).mask(0), 5) == std::vector<int>{0});
  // sset(B) = {A ^ B}
  REQUIRE(s.tbl.sset(1).count == 1);
  CHECK(mask_to_vars(s.tbl.sset(1).mask(0), 5) == std::vector<int>{0, 1});
  // sset(C) = {A ^ !B ^ C}: positives {A, C}
  REQUIRE(s.tbl.sset(2).count == 1);
  CHECK(mask_to_vars(s.tbl.sset(2).mask(0), 5) == std::vector<int>{0, 2});
  // sset(D) = {A ^ B ^ !C ^ D}
  REQUIRE(s.tbl.sset(3).count == 1);
  CHECK(mask_to_vars(s.tbl.sset(3).mask(0), 5) == std::vector<int>{0, 1, 3});
  // E is deepest: its sub-contexts are the two full s-paths
  CHECK(s.tbl.sset(4).count == 2);
}

TEST_CASE("connectivity entries of the example graph") {
  Graph g = g5();
  Setup s(g, 0, 4);
  // (A, D): D's lone sub-context contains literal A
  auto row = s.tbl.connectivity(0, 3, 0);
  REQUIRE(row.size() == 1);
  CHECK(row[0] == 0);
  // (B, C): no C sub-context contains A ^ B
  CHECK(s.tbl.connectivity(1, 2, 0).empty());
  // reverse direction (D, A): containment of A's sub-context in D's
  REQUIRE(s.tbl.connectivity(3, 0, 0).size() == 1);
}

TEST_CASE("hashed precompute equals the quadratic reference") {
  Graph g = g5();
  DiagramManager m(Vtree::right_linear(g.num_edges()));
  Psdd p = uniform_parameterize(compile_paths(m, g, 0, 4));
  auto ssets = build_subcontext_sets(p);
  CHECK(tables_equal(precompute_connectivity(ssets, m.vtree()),
                     precompute_connectivity_serial(ssets, m.vtree())));

  for (int dim : {3, 4}) {
    GridMap gm = build_grid(dim, dim, {});
    DiagramManager gmgr(Vtree::right_linear(gm.graph.num_edges()));
    Psdd gp = uniform_parameterize(
        compile_paths(gmgr, gm.graph, gm.cell_to_vertex[dim - 1],
                      gm.cell_to_vertex[(dim - 1) * dim]));
    auto gs = build_subcontext_sets(gp);
    CHECK(tables_equal(precompute_connectivity(gs, gmgr.vtree()),
                       precompute_connectivity_serial(gs, gmgr.vtree())));
  }
}

TEST_CASE("query sequence from the worked example") {
  Graph g = g5();
  Setup s(g, 0, 4);
  PathState st = init_state(g, 0);
  CHECK(st.path.empty());
  CHECK(st.current_vertex == 0);
  CHECK(feas(st, g, s.tbl) == std::vector<int>{0});

  advance(st, 0, g, s.tbl);  // A
  CHECK(st.deepest_var == 0);
  CHECK(st.surviving == std::vector<uint32_t>{0});
  CHECK(feas(st, g, s.tbl) == std::vector<int>{1, 2});  // B or C

  SUBCASE("A, B then D is the only continuation") {
    advance(st, 1, g, s.tbl);  // B
    CHECK(st.deepest_var == 1);
    CHECK(nz_query(st, 3, g, s.tbl));  // D
    CHECK(feas(st, g, s.tbl) == std::vector<int>{3});  // C never offered
    advance(st, 3, g, s.tbl);
    // sc* = A ^ B ^ !C ^ D
    CHECK(st.deepest_var == 3);
    CHECK(st.surviving == std::vector<uint32_t>{0});
    CHECK(feas(st, g, s.tbl) == std::vector<int>{4});
  }
  SUBCASE("A, C prunes the dead end through n3") {
    advance(st, 2, g, s.tbl);  // C
    CHECK(!nz_query(st, 3, g, s.tbl));  // D dead-ends
    CHECK(feas(st, g, s.tbl) == std::vector<int>{4});
  }
}

TEST_CASE("query preconditions are enforced") {
  Graph g = g5();
  Setup s(g, 0, 4);
  PathState st = init_state(g, 0);
  CHECK_THROWS_AS(nz_query(st, 4, g, s.tbl), std::invalid_argument);
  advance(st, 0, g, s.tbl);
  CHECK_THROWS_AS(nz_query(st, 0, g, s.tbl), std::invalid_argument);
  advance(st, 2, g, s.tbl);  // A, C puts us at n4 where D is a dead end
  CHECK_THROWS_AS(advance(st, 3, g, s.tbl), std::logic_error);
  CHECK_THROWS(init_state(g, 9));
}

TEST_CASE("feas at an isolated vertex is empty") {
  Graph g(6, {{0, 1}, {1, 2}, {1, 3}, {2, 3}, {3, 4}});
  Setup s(g, 0, 4);
  PathState st = init_state(g, 5);
  CHECK(feas(st, g, s.tbl).empty());
}

TEST_CASE("surviving matches a direct containment recheck") {
  GridMap gm = build_grid(3, 3, {});
  int src = gm.cell_to_vertex[2], dst = gm.cell_to_vertex[6];
  Setup s(gm.graph, src, dst);
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    PathState st = init_state(gm.graph, src);
    while (st.current_vertex != dst) {
      auto f = feas(st, gm.graph, s.tbl);
      REQUIRE(!f.empty());
      advance(st, f[rng() % f.size()], gm.graph, s.tbl);
      // surviving == ids of deepest-var sub-contexts containing the path
      const SubContextSet& ss = s.tbl.sset(st.deepest_var);
      std::vector<uint32_t> expect;
      for (uint32_t id = 0; id < ss.count; ++id) {
        bool contains = true;
        for (int var : st.path) {
          if (!(ss.mask(id)[var / 64] >> (var % 64) & 1)) contains = false;
        }
        if (contains) expect.push_back(id);
      }
      CHECK(st.surviving == expect);
    }
    CHECK(is_simple_path(gm.graph, {st.path, src, dst}));
  }
}

TEST_CASE("oracle equivalence over exhaustive g5 prefixes") {
  Graph g = g5();
  Setup s(g, 0, 4);
  // walk the whole feasible prefix tree
  std::vector<PathState> stack = {init_state(g, 0)};
  while (!stack.empty()) {
    PathState st = std::move(stack.back());
    stack.pop_back();
    if (st.current_vertex == 4) continue;
    for (int var : g.incident_vars(st.current_vertex)) {
      if (st.on_path[var]) continue;
      bool fast = nz_query(st, var, g, s.tbl);
      CHECK(fast == prefix_extends_to_path(g, 0, 4, st.path, var));
      CHECK(fast == (conditional_probability(s.p, var, st.path) > 0.0));
      if (fast) {
        PathState next = st;
        advance(next, var, g, s.tbl);
        stack.push_back(std::move(next));
      }
    }
  }
}

TEST_CASE("table binary cache round trip") {
  GridMap gm = build_grid(3, 3, {});
  int src = gm.cell_to_vertex[2], dst = gm.cell_to_vertex[6];
  Setup s(gm.graph, src, dst);
  std::stringstream ss;
  write_table(s.tbl, ss);
  SubContextTable back = read_table(ss);
  CHECK(tables_equal(s.tbl, back));
  CHECK(back.vtree() == s.tbl.vtree());
  REQUIRE(back.num_vars() == s.tbl.num_vars());
  for (int v = 0; v < back.num_vars(); ++v) {
    CHECK(back.sset(v).bits == s.tbl.sset(v).bits);
    CHECK(back.sset(v).count == s.tbl.sset(v).count);
  }
  std::stringstream junk("nonsense");
  CHECK_THROWS(read_table(junk));
}
