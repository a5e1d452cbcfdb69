#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "wmm/cfg.hpp"
#include "wmm/parser.hpp"

using namespace wmm;

TEST_CASE("straight-line thread wires entry, statements, exit") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t { x := 1; r := x; }\n");
  Cfg cfg = build_cfg(p);
  REQUIRE(cfg.threads.size() == 1);
  const ThreadCfg& tc = cfg.threads[0];
  const CfgNode& entry = cfg.nodes[static_cast<size_t>(tc.entry)];
  CHECK(entry.kind == CfgNode::Kind::Entry);
  CHECK(entry.stmt == nullptr);
  REQUIRE(entry.succ.size() == 1);
  int store = entry.succ[0];
  const CfgNode& sn = cfg.nodes[static_cast<size_t>(store)];
  CHECK(sn.kind == CfgNode::Kind::Stmt);
  CHECK(sn.is_write());
  CHECK(sn.is_access());
  CHECK(!sn.is_branch());
  CHECK(sn.thread == 0);
  CHECK(sn.line() == 2);
  REQUIRE(sn.succ.size() == 1);
  int load = sn.succ[0];
  const CfgNode& ln = cfg.nodes[static_cast<size_t>(load)];
  CHECK(ln.is_access());
  CHECK(!ln.is_write());
  REQUIRE(ln.succ.size() == 1);
  CHECK(ln.succ[0] == tc.exit);
  CHECK(cfg.nodes[static_cast<size_t>(tc.exit)].kind == CfgNode::Kind::Exit);
  CHECK(cfg.access_nodes(0) == std::vector<int>({store, load}));
}

TEST_CASE("empty thread connects entry straight to exit") {
  Program p = parse_program("shared x = 0;\nthread t { }\n");
  Cfg cfg = build_cfg(p);
  const ThreadCfg& tc = cfg.threads[0];
  REQUIRE(cfg.nodes[static_cast<size_t>(tc.entry)].succ.size() == 1);
  CHECK(cfg.nodes[static_cast<size_t>(tc.entry)].succ[0] == tc.exit);
  CHECK(cfg.access_nodes(0).empty());
}

TEST_CASE("if/else branches fork and rejoin") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t {\n"
      "  r := x;\n"
      "  if (r == 0) { x := 1; } else { x := 2; }\n"
      "  x := 3;\n"
      "}\n");
  Cfg cfg = build_cfg(p);
  const ThreadCfg& tc = cfg.threads[0];
  int load = cfg.nodes[static_cast<size_t>(tc.entry)].succ[0];
  int branch = cfg.nodes[static_cast<size_t>(load)].succ[0];
  const CfgNode& bn = cfg.nodes[static_cast<size_t>(branch)];
  CHECK(bn.is_branch());
  CHECK(!bn.is_access());
  REQUIRE(bn.succ.size() == 2);
  int then_node = bn.succ[0];
  int else_node = bn.succ[1];
  CHECK(then_node != else_node);
  CHECK(cfg.nodes[static_cast<size_t>(then_node)].line() == 4);
  CHECK(cfg.nodes[static_cast<size_t>(else_node)].line() == 4);
  // Both arms fall through to the trailing store.
  int join = cfg.nodes[static_cast<size_t>(then_node)].succ[0];
  CHECK(cfg.nodes[static_cast<size_t>(else_node)].succ[0] == join);
  CHECK(cfg.nodes[static_cast<size_t>(join)].line() == 5);
  CHECK(cfg.nodes[static_cast<size_t>(join)].succ[0] == tc.exit);
}

TEST_CASE("if without else falls through on the false slot") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t { r := x; if (r) { x := 1; } x := 2; }\n");
  Cfg cfg = build_cfg(p);
  const ThreadCfg& tc = cfg.threads[0];
  int load = cfg.nodes[static_cast<size_t>(tc.entry)].succ[0];
  int branch = cfg.nodes[static_cast<size_t>(load)].succ[0];
  const CfgNode& bn = cfg.nodes[static_cast<size_t>(branch)];
  REQUIRE(bn.succ.size() == 2);
  int taken = bn.succ[0];
  int fall = bn.succ[1];
  CHECK(cfg.nodes[static_cast<size_t>(taken)].is_write());
  CHECK(cfg.nodes[static_cast<size_t>(taken)].succ[0] == fall);
  CHECK(cfg.nodes[static_cast<size_t>(fall)].succ[0] == tc.exit);
}

TEST_CASE("while loop: body returns to the condition, exit on false") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t { r := x; while (!r) { r := x; } x := 1; }\n");
  Cfg cfg = build_cfg(p);
  const ThreadCfg& tc = cfg.threads[0];
  int first = cfg.nodes[static_cast<size_t>(tc.entry)].succ[0];
  int loop = cfg.nodes[static_cast<size_t>(first)].succ[0];
  const CfgNode& ln = cfg.nodes[static_cast<size_t>(loop)];
  REQUIRE(ln.is_branch());
  REQUIRE(ln.succ.size() == 2);
  int body = ln.succ[0];
  int after = ln.succ[1];
  CHECK(cfg.nodes[static_cast<size_t>(body)].succ[0] == loop);
  CHECK(cfg.nodes[static_cast<size_t>(after)].is_write());
  // reaches is one-or-more steps, so the loop head reaches itself and the
  // body load reaches itself through the back edge.
  CHECK(cfg.reaches(loop, loop));
  CHECK(cfg.reaches(body, body));
  CHECK(cfg.reaches(body, after));
  CHECK(!cfg.reaches(after, body));
  // The straight-line prefix does not reach itself.
  CHECK(!cfg.reaches(first, first));
  CHECK(cfg.reaches(tc.entry, tc.exit));
}

TEST_CASE("empty while body spins on the condition node") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t { r := x; while (r) { } x := 1; }\n");
  Cfg cfg = build_cfg(p);
  const ThreadCfg& tc = cfg.threads[0];
  int first = cfg.nodes[static_cast<size_t>(tc.entry)].succ[0];
  int loop = cfg.nodes[static_cast<size_t>(first)].succ[0];
  const CfgNode& ln = cfg.nodes[static_cast<size_t>(loop)];
  REQUIRE(ln.succ.size() == 2);
  CHECK(ln.succ[0] == loop);  // taken branch re-tests the condition
  CHECK(cfg.nodes[static_cast<size_t>(ln.succ[1])].is_write());
  CHECK(cfg.reaches(loop, loop));
}

TEST_CASE("fence nodes report their kind") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t { x := 1; fence; lwfence; r := x; }\n");
  Cfg cfg = build_cfg(p);
  std::vector<FenceKind> kinds;
  for (const CfgNode& n : cfg.nodes)
    if (n.kind == CfgNode::Kind::Stmt) kinds.push_back(n.fence());
  CHECK(kinds == std::vector<FenceKind>({FenceKind::None, FenceKind::Full,
                                         FenceKind::Lw, FenceKind::None}));
}

TEST_CASE("threads get disjoint node ranges and per-thread access lists") {
  Program p = parse_program(
      "shared x = 0;\n"
      "shared y = 0;\n"
      "thread p0 { x := 1; r1 := y; }\n"
      "thread p1 { y := 1; r2 := x; }\n");
  Cfg cfg = build_cfg(p);
  REQUIRE(cfg.threads.size() == 2);
  for (const CfgNode& n : cfg.nodes) {
    CHECK((n.thread == 0 || n.thread == 1));
    for (int s : n.succ)
      if (s >= 0)
        CHECK(cfg.nodes[static_cast<size_t>(s)].thread == n.thread);
  }
  auto a0 = cfg.access_nodes(0);
  auto a1 = cfg.access_nodes(1);
  CHECK(a0.size() == 2);
  CHECK(a1.size() == 2);
  CHECK(std::is_sorted(a0.begin(), a0.end()));
  CHECK(std::is_sorted(a1.begin(), a1.end()));
  // Cross-thread nodes are unreachable from each other.
  CHECK(!cfg.reaches(cfg.threads[0].entry, cfg.threads[1].entry));
  CHECK(!cfg.reaches(a0[0], a1[0]));
}

TEST_CASE("finalizer statements produce no CFG nodes") {
  Program with = parse_program(
      "shared x = 0;\n"
      "thread t { x := 1; }\n"
      "finalizer { buff_flush_oldest(x); buff_flush_oldest(x); }\n");
  Program without = parse_program(
      "shared x = 0;\n"
      "thread t { x := 1; }\n");
  CHECK(build_cfg(with).nodes.size() == build_cfg(without).nodes.size());
}

TEST_CASE("reachable_from collects the whole suffix once") {
  Program p = parse_program(
      "shared x = 0;\n"
      "thread t { r := x; while (!r) { r := x; } x := 1; }\n");
  Cfg cfg = build_cfg(p);
  const ThreadCfg& tc = cfg.threads[0];
  std::vector<int> reach = cfg.reachable_from(tc.entry);
  std::sort(reach.begin(), reach.end());
  CHECK(std::adjacent_find(reach.begin(), reach.end()) == reach.end());
  // Everything except the entry itself is reachable.
  std::vector<int> expect;
  for (const CfgNode& n : cfg.nodes)
    if (n.id != tc.entry) expect.push_back(n.id);
  CHECK(reach == expect);
}
