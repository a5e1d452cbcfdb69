#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "wmm/cfg.hpp"
#include "wmm/event_graph.hpp"
#include "wmm/parser.hpp"
#include "wmm/printer.hpp"
#include "wmm/transform.hpp"

using namespace wmm;

namespace {

struct Loaded {
  Program p;
  Cfg cfg;
  EventGraph g;
};

Loaded load(const char* file) {
  Loaded out{parse_file(std::string(CORPUS_DIR "/") + file), {}, {}};
  out.cfg = build_cfg(out.p);
  out.g = build_event_graph(out.p, out.cfg);
  return out;
}

TransformOutput run(const Loaded& l, Arch a, Strategy s) {
  DelaySelection sel = select_pairs(find_critical_cycles(l.g, a), s);
  return transform(l.p, l.cfg, l.g, sel, a);
}

// Statement census over threads and finalizer, recursing into branches.
struct Census {
  int stores = 0, loads = 0, pushes = 0, takes = 0, flushes = 0;
  int delay_sets = 0, delay_resolves = 0, bound_asserts = 0, fences = 0;
};

void count_list(const std::vector<StmtPtr>& body, Census& c) {
  for (const StmtPtr& sp : body) {
    switch (sp->kind) {
      case Stmt::Kind::Store: ++c.stores; break;
      case Stmt::Kind::Load: ++c.loads; break;
      case Stmt::Kind::BuffPush: ++c.pushes; break;
      case Stmt::Kind::BuffTake: ++c.takes; break;
      case Stmt::Kind::BuffFlushOldest: ++c.flushes; break;
      case Stmt::Kind::DelaySet: ++c.delay_sets; break;
      case Stmt::Kind::DelayResolve: ++c.delay_resolves; break;
      case Stmt::Kind::BoundAssert: ++c.bound_asserts; break;
      case Stmt::Kind::Fence:
      case Stmt::Kind::LwFence: ++c.fences; break;
      default: break;
    }
    count_list(sp->body, c);
    count_list(sp->else_body, c);
  }
}

Census census(const Program& p) {
  Census c;
  for (const Thread& t : p.threads) count_list(t.body, c);
  count_list(p.finalizer, c);
  return c;
}

std::set<std::string> loc_names(const std::vector<Loc>& locs) {
  std::set<std::string> out;
  for (const Loc& l : locs) out.insert(l.str());
  return out;
}

}  // namespace

TEST_CASE("empty selection returns the program unchanged") {
  for (const char* file : {"sb.wmm", "sb+fence.wmm", "mp+lwfence.wmm"}) {
    Loaded l = load(file);
    CAPTURE(file);
    // SC never has critical cycles; the fenced programs have none anywhere.
    TransformOutput out = run(l, Arch::SC, Strategy::All);
    CHECK(equal(out.program, l.p));
    CHECK(out.buffered_locs.empty());
    CHECK(out.tagged_stores == 0);
    CHECK(out.tagged_loads == 0);
    // Fences survive the identity transformation.
    CHECK(census(out.program).fences == census(l.p).fences);
  }
  Loaded fenced = load("sb+fence.wmm");
  TransformOutput out = run(fenced, Arch::POWER, Strategy::All);
  CHECK(equal(out.program, fenced.p));
  CHECK(census(out.program).fences == 2);
}

TEST_CASE("store buffering on TSO: tagged stores and optional flushes") {
  Loaded l = load("sb.wmm");
  TransformOutput out = run(l, Arch::TSO, Strategy::All);
  CHECK(out.tagged_stores == 2);
  CHECK(out.tagged_loads == 0);
  CHECK(loc_names(out.buffered_locs) == std::set<std::string>({"x", "y"}));
  Census c = census(out.program);
  CHECK(c.pushes == 2);
  CHECK(c.bound_asserts == 2);  // one capacity probe per tagged store
  CHECK(c.takes == 0);
  CHECK(c.delay_sets == 0);
  // Direct-store twin survives next to each push.
  CHECK(c.stores == 2);
  // Finalizer drains each buffered location to capacity.
  Census fin;
  count_list(out.program.finalizer, fin);
  CHECK(fin.flushes == 4);
  // Final assertion and shared declarations are untouched.
  REQUIRE(out.program.final_assert != nullptr);
  CHECK(equal(*out.program.final_assert, *l.p.final_assert));
  CHECK(out.program.shareds.size() == l.p.shareds.size());
}

TEST_CASE("tagged store shape: choice of direct store or capacity-probed push") {
  Loaded l = load("sb.wmm");
  TransformOutput out = run(l, Arch::TSO, Strategy::All);
  const auto& body = out.program.threads[0].body;
  REQUIRE(!body.empty());
  const Stmt& s = *body[0];
  REQUIRE(s.kind == Stmt::Kind::If);
  REQUIRE(s.expr != nullptr);
  CHECK(contains_star(*s.expr));
  REQUIRE(s.body.size() == 2);
  CHECK(s.body[0]->kind == Stmt::Kind::BoundAssert);
  CHECK(s.body[1]->kind == Stmt::Kind::BuffPush);
  CHECK(s.body[1]->buff_thread == 0);
  REQUIRE(s.else_body.size() == 1);
  CHECK(s.else_body[0]->kind == Stmt::Kind::Store);
  // The push and the direct store write the same value to the same cell.
  CHECK(s.body[1]->loc == s.else_body[0]->loc);
  CHECK(equal(*s.body[1]->expr, *s.else_body[0]->expr));
  // The second thread pushes under its own id.
  const auto& body1 = out.program.threads[1].body;
  REQUIRE(body1[0]->kind == Stmt::Kind::If);
  CHECK(body1[0]->body[1]->buff_thread == 1);
}

TEST_CASE("one-per-cycle on sb buffers only the selected location") {
  Loaded l = load("sb.wmm");
  TransformOutput out = run(l, Arch::TSO, Strategy::OnePerCycle);
  CHECK(out.tagged_stores == 1);
  CHECK(out.tagged_loads == 0);
  CHECK(loc_names(out.buffered_locs) == std::set<std::string>({"x"}));
  Census c = census(out.program);
  CHECK(c.pushes == 1);
  // The unselected thread keeps its plain store.
  Census t1;
  count_list(out.program.threads[1].body, t1);
  CHECK(t1.pushes == 0);
  CHECK(t1.stores == 1);
  // Its flush points still service the shared buffer.
  CHECK(t1.flushes > 0);
}

TEST_CASE("external read-from pairs tag the load with take and delay") {
  Loaded l = load("iriw+dps.wmm");
  TransformOutput out = run(l, Arch::POWER, Strategy::OnePerCycle);
  CHECK(out.tagged_stores == 1);
  CHECK(out.tagged_loads == 1);
  CHECK(loc_names(out.buffered_locs) == std::set<std::string>({"x"}));
  Census c = census(out.program);
  CHECK(c.pushes == 1);
  CHECK(c.takes == 1);
  CHECK(c.delay_sets == 1);
  CHECK(c.delay_resolves > 0);
  // The tagged load offers memory, buffered write, and postponement.
  const auto& body = out.program.threads[0].body;
  bool found = false;
  for (const StmtPtr& sp : body) {
    if (sp->kind != Stmt::Kind::If || sp->body.empty()) continue;
    if (sp->body[0]->kind != Stmt::Kind::Load) continue;
    found = true;
    REQUIRE(sp->else_body.size() == 1);
    const Stmt& inner = *sp->else_body[0];
    REQUIRE(inner.kind == Stmt::Kind::If);
    REQUIRE(!inner.body.empty());
    CHECK(inner.body[0]->kind == Stmt::Kind::BuffTake);
    CHECK(inner.body[0]->take_any);  // any-thread take
    REQUIRE(!inner.else_body.empty());
    CHECK(inner.else_body[0]->kind == Stmt::Kind::DelaySet);
    // All three arms target the same location.
    CHECK(sp->body[0]->loc == inner.body[0]->loc);
    CHECK(sp->body[0]->loc == inner.else_body[0]->loc);
  }
  CHECK(found);
  // The finalizer resolves the delay register after draining.
  bool resolve_in_finalizer = false;
  Census fin;
  count_list(out.program.finalizer, fin);
  resolve_in_finalizer = fin.delay_resolves > 0;
  CHECK(resolve_in_finalizer);
  CHECK(fin.flushes == 2);  // one buffered location, drained to capacity
}

TEST_CASE("message passing on POWER: all pairs vs one per cycle") {
  Loaded l = load("mp.wmm");
  TransformOutput all = run(l, Arch::POWER, Strategy::All);
  CHECK(all.tagged_stores == 2);
  CHECK(all.tagged_loads == 1);
  CHECK(loc_names(all.buffered_locs) == std::set<std::string>({"x", "y"}));
  TransformOutput one = run(l, Arch::POWER, Strategy::OnePerCycle);
  CHECK(one.tagged_stores == 1);
  CHECK(one.tagged_loads == 0);
  CHECK(loc_names(one.buffered_locs) == std::set<std::string>({"x"}));
}

TEST_CASE("fences are consumed when the selection is applied") {
  // Only one thread is fenced: the other thread's pair stays relaxed, so
  // the transformation fires and drops the fence.
  Program p = parse_program(
      "shared x = 0;\n"
      "shared y = 0;\n"
      "thread p0 { x := 1; fence; r1 := y; }\n"
      "thread p1 { y := 1; r2 := x; }\n"
      "assert_final(!(r1 == 0 && r2 == 0));\n");
  Cfg cfg = build_cfg(p);
  EventGraph g = build_event_graph(p, cfg);
  auto cycles = find_critical_cycles(g, Arch::TSO);
  REQUIRE(cycles.size() == 1);
  DelaySelection sel = select_pairs(cycles, Strategy::All);
  REQUIRE(sel.pairs.size() == 1);  // only p1's write-read pair is relaxed
  CHECK(sel.pairs[0].e1 == 2);
  TransformOutput out = transform(p, cfg, g, sel, Arch::TSO);
  CHECK(census(out.program).fences == 0);
  CHECK(out.tagged_stores == 1);
  // The fenced thread keeps its store direct.
  Census t0;
  count_list(out.program.threads[0].body, t0);
  CHECK(t0.pushes == 0);
  CHECK(t0.stores == 1);
}

TEST_CASE("subscripted locations buffer per cell") {
  Program p = parse_program(
      "shared a[2] = 0;\n"
      "thread p0 { a[0] := 1; r1 := a[1]; }\n"
      "thread p1 { a[1] := 1; r2 := a[0]; }\n"
      "assert_final(!(r1 == 0 && r2 == 0));\n");
  Cfg cfg = build_cfg(p);
  EventGraph g = build_event_graph(p, cfg);
  auto cycles = find_critical_cycles(g, Arch::TSO);
  REQUIRE(cycles.size() == 1);
  TransformOutput out =
      transform(p, cfg, g, select_pairs(cycles, Strategy::All), Arch::TSO);
  CHECK(loc_names(out.buffered_locs) ==
        std::set<std::string>({"a[0]", "a[1]"}));
  Census c = census(out.program);
  CHECK(c.pushes == 2);
  Census fin;
  count_list(out.program.finalizer, fin);
  CHECK(fin.flushes == 4);
}

TEST_CASE("transformed programs round-trip through the printer") {
  struct Case {
    const char* file;
    Arch a;
    Strategy s;
  };
  const Case cases[] = {
      {"sb.wmm", Arch::TSO, Strategy::All},
      {"mp.wmm", Arch::POWER, Strategy::All},
      {"iriw+dps.wmm", Arch::POWER, Strategy::OnePerCycle},
      {"pgsql.wmm", Arch::POWER, Strategy::OnePerCycle},
      {"pgsql+patch.wmm", Arch::POWER, Strategy::All},
  };
  for (const Case& c : cases) {
    CAPTURE(c.file);
    Loaded l = load(c.file);
    TransformOutput out = run(l, c.a, c.s);
    std::string text = print_program(out.program);
    Program back = parse_program(text);
    CHECK(equal(back, out.program));
    CHECK(print_program(back) == text);
  }
}

TEST_CASE("transformation is deterministic") {
  Loaded l = load("pgsql.wmm");
  TransformOutput a = run(l, Arch::POWER, Strategy::OnePerCycle);
  TransformOutput b = run(l, Arch::POWER, Strategy::OnePerCycle);
  CHECK(equal(a.program, b.program));
  CHECK(print_program(a.program) == print_program(b.program));
}

TEST_CASE("generated registers are marked, source registers survive") {
  Loaded l = load("iriw+dps.wmm");
  TransformOutput out = run(l, Arch::POWER, Strategy::OnePerCycle);
  // Every original register is still present with its thread and flag.
  for (const RegisterInfo& r : l.p.registers) {
    int idx = out.program.find_register(r.name, r.thread);
    REQUIRE(idx >= 0);
    CHECK(out.program.registers[static_cast<size_t>(idx)].generated ==
          r.generated);
  }
  // The transformation only adds generated, underscore-prefixed names.
  CHECK(out.program.registers.size() > l.p.registers.size());
  for (size_t i = 0; i < out.program.registers.size(); ++i) {
    const RegisterInfo& r = out.program.registers[i];
    if (out.program.find_register(r.name, r.thread) >= 0 &&
        l.p.find_register(r.name, r.thread) < 0) {
      CHECK(r.generated);
      CHECK(r.name[0] == '_');
    }
  }
}

TEST_CASE("a read-from pair must link a store to a load") {
  Loaded l = load("sb.wmm");
  DelaySelection sel;
  sel.strategy = Strategy::All;
  sel.pairs.push_back({PairRole::RfePair, 1, 2});  // read as the source
  CHECK_THROWS_WITH_AS(transform(l.p, l.cfg, l.g, sel, Arch::POWER),
                       doctest::Contains("store to a load"),
                       std::runtime_error);
}
