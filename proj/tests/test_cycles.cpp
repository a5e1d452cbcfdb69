#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "wmm/cfg.hpp"
#include "wmm/event_graph.hpp"
#include "wmm/exec_enum.hpp"
#include "wmm/parser.hpp"

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

using Triple = std::tuple<PairRole, int, int>;

std::set<Triple> selection_triples(const DelaySelection& sel) {
  std::set<Triple> out;
  for (const DelayPair& p : sel.pairs) out.insert({p.role, p.e1, p.e2});
  return out;
}

std::set<Triple> cycle_triples(const CriticalCycle& c) {
  std::set<Triple> out;
  for (const CyclePair& p : c.pairs) out.insert({p.role, p.e1, p.e2});
  return out;
}

std::set<int> cycle_lines(const EventGraph& g, const CriticalCycle& c) {
  std::set<int> out;
  for (int e : c.events) out.insert(g.events[static_cast<size_t>(e)].line);
  return out;
}

bool has_cycle_with_lines(const EventGraph& g,
                          const std::vector<CriticalCycle>& cycles,
                          const std::set<int>& lines) {
  for (const CriticalCycle& c : cycles)
    if (cycle_lines(g, c) == lines) return true;
  return false;
}

}  // namespace

TEST_CASE("event letters") {
  CHECK(event_letter(0) == "a");
  CHECK(event_letter(1) == "b");
  CHECK(event_letter(25) == "z");
  CHECK(event_letter(26) == "e26");
  CHECK(event_letter(100) == "e100");
}

TEST_CASE("store buffering graph: events, po, cmp") {
  Loaded l = load("sb.wmm");
  REQUIRE(l.g.n() == 4);
  // a = W x, b = R y, c = W y, d = R x, in thread then program order.
  CHECK(l.g.events[0].is_write);
  CHECK(l.g.events[0].loc == Loc{"x", 0, false});
  CHECK(l.g.events[0].proc == 0);
  CHECK(!l.g.events[1].is_write);
  CHECK(l.g.events[1].loc == Loc{"y", 0, false});
  CHECK(l.g.events[2].proc == 1);
  CHECK(l.g.is_po(0, 1));
  CHECK(!l.g.is_po(1, 0));
  CHECK(l.g.is_po(2, 3));
  CHECK(!l.g.is_po(0, 2));  // cross-thread
  // Competing pairs: same location, different threads, one write.
  CHECK(l.g.is_cmp(0, 3));
  CHECK(l.g.is_cmp(3, 0));
  CHECK(l.g.is_cmp(1, 2));
  CHECK(!l.g.is_cmp(0, 1));
  CHECK(!l.g.is_cmp(0, 2));
  CHECK(l.g.dp.empty());
  // Node mapping is total over access nodes.
  for (const AbstractEvent& e : l.g.events)
    CHECK(l.g.event_of_node(e.cfg_node) == e.id);
  CHECK(l.g.event_of_node(l.cfg.threads[0].entry) == -1);
}

TEST_CASE("store buffering cycles per model") {
  Loaded l = load("sb.wmm");
  CHECK(find_critical_cycles(l.g, Arch::SC).empty());
  for (Arch a : {Arch::TSO, Arch::PSO, Arch::RMO, Arch::POWER}) {
    auto cycles = find_critical_cycles(l.g, a);
    CAPTURE(arch_name(a));
    REQUIRE(cycles.size() == 1);
    CHECK(cycles[0].events == std::vector<int>({0, 1, 2, 3}));
    CHECK(cycle_triples(cycles[0]) ==
          std::set<Triple>({{PairRole::PoPair, 0, 1},
                            {PairRole::PoPair, 2, 3}}));
  }
  // The write-read pairs are relaxed from TSO down.
  auto all = enumerate_cycles(l.g);
  REQUIRE(all.cycles.size() == 1);
  CHECK(!all.cap_hit);
  for (const CyclePair& p : all.cycles[0].pairs) {
    CHECK(p.relaxed_on == std::vector<Arch>({Arch::TSO, Arch::PSO, Arch::RMO,
                                             Arch::POWER}));
    CHECK(!p.relaxed(Arch::SC));
    CHECK(p.relaxed(Arch::TSO));
    CHECK(p.relaxed(Arch::POWER));
  }
}

TEST_CASE("message passing cycles per model") {
  Loaded l = load("mp.wmm");
  CHECK(find_critical_cycles(l.g, Arch::SC).empty());
  CHECK(find_critical_cycles(l.g, Arch::TSO).empty());
  // a = W x, b = W y, c = R y, d = R x.
  auto pso = find_critical_cycles(l.g, Arch::PSO);
  REQUIRE(pso.size() == 1);
  CHECK(cycle_triples(pso[0]) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1}}));
  auto rmo = find_critical_cycles(l.g, Arch::RMO);
  REQUIRE(rmo.size() == 1);
  CHECK(cycle_triples(rmo[0]) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1},
                          {PairRole::PoPair, 2, 3}}));
  auto power = find_critical_cycles(l.g, Arch::POWER);
  REQUIRE(power.size() == 1);
  CHECK(cycle_triples(power[0]) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1},
                          {PairRole::PoPair, 2, 3},
                          {PairRole::RfePair, 1, 2}}));
}

TEST_CASE("fenced corpus programs have no critical cycles anywhere") {
  for (const char* file : {"sb+fence.wmm", "mp+lwfence.wmm"}) {
    Loaded l = load(file);
    for (Arch a : kAllArchs) {
      CAPTURE(file);
      CAPTURE(arch_name(a));
      CHECK(find_critical_cycles(l.g, a).empty());
    }
  }
}

TEST_CASE("guaranteed fences annotate po") {
  Loaded l = load("sb+fence.wmm");
  CHECK(l.g.po_fence[0][1] == FenceKind::Full);
  Loaded m = load("mp+lwfence.wmm");
  CHECK(m.g.po_fence[0][1] == FenceKind::Lw);
  Loaded plain = load("sb.wmm");
  CHECK(plain.g.po_fence[0][1] == FenceKind::None);
}

TEST_CASE("a fence on only one branch is not guaranteed") {
  Program p = parse_program(
      "shared x = 0;\n"
      "shared y = 0;\n"
      "thread t {\n"
      "  r := x;\n"
      "  if (r) { fence; } else { }\n"
      "  y := 1;\n"
      "}\n"
      "thread u { s := y; }\n");
  Cfg cfg = build_cfg(p);
  EventGraph g = build_event_graph(p, cfg);
  // Events: 0 = R x, 1 = W y, 2 = R y.
  REQUIRE(g.n() == 3);
  CHECK(g.is_po(0, 1));
  CHECK(g.po_fence[0][1] == FenceKind::None);
  // Hoisting the fence out of the branch guarantees it.
  Program q = parse_program(
      "shared x = 0;\n"
      "shared y = 0;\n"
      "thread t { r := x; fence; y := 1; }\n"
      "thread u { s := y; }\n");
  Cfg qcfg = build_cfg(q);
  EventGraph qg = build_event_graph(q, qcfg);
  CHECK(qg.po_fence[0][1] == FenceKind::Full);
}

TEST_CASE("loop-body accesses relate both ways in po") {
  Program p = parse_program(
      "shared x = 0;\n"
      "shared y = 0;\n"
      "thread t { r := x; while (!r) { r := x; y := r; } }\n"
      "thread u { x := 1; }\n");
  Cfg cfg = build_cfg(p);
  EventGraph g = build_event_graph(p, cfg);
  // Events: 0 = R x (pre-loop), 1 = R x (body), 2 = W y (body), 3 = W x.
  REQUIRE(g.n() == 4);
  CHECK(g.is_po(0, 1));
  CHECK(!g.is_po(1, 0));  // nothing loops back before the pre-loop load
  CHECK(g.is_po(1, 2));
  CHECK(g.is_po(2, 1));  // next iteration's load follows this store
}

TEST_CASE("dependencies protect the reader pairs of iriw with dps") {
  Loaded l = load("iriw+dps.wmm");
  REQUIRE(l.g.n() == 6);
  // a = R x, b = R y (thd1), c = R y, d = R x (thd2), e = W x, f = W y.
  CHECK(l.g.is_dp(0, 1));
  CHECK(l.g.is_dp(2, 3));
  CHECK(l.g.dp.size() == 2);
  // No cycle survives anywhere below POWER.
  for (Arch a : {Arch::SC, Arch::TSO, Arch::PSO, Arch::RMO}) {
    CAPTURE(arch_name(a));
    CHECK(find_critical_cycles(l.g, a).empty());
  }
  auto cycles = find_critical_cycles(l.g, Arch::POWER);
  REQUIRE(cycles.size() == 1);
  CHECK(cycles[0].events == std::vector<int>({0, 1, 5, 2, 3, 4}));
  CHECK(cycle_triples(cycles[0]) ==
        std::set<Triple>({{PairRole::RfePair, 4, 0},
                          {PairRole::RfePair, 5, 2}}));
  for (const CyclePair& p : cycles[0].pairs)
    CHECK(p.relaxed_on == std::vector<Arch>({Arch::POWER}));
  // Without dependencies the same shape is already critical on RMO.
  Loaded plain = load("iriw.wmm");
  CHECK(plain.g.dp.empty());
  auto rmo = find_critical_cycles(plain.g, Arch::RMO);
  REQUIRE(rmo.size() == 1);
  CHECK(cycle_triples(rmo[0]) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1},
                          {PairRole::PoPair, 2, 3}}));
}

TEST_CASE("every enumerated cycle re-validates structurally") {
  for (const char* file : {"sb.wmm", "lb.wmm", "mp.wmm", "iriw.wmm",
                           "iriw+dps.wmm", "pgsql.wmm", "pgsql+patch.wmm"}) {
    Loaded l = load(file);
    for (Arch a : kAllArchs)
      for (const CriticalCycle& c : find_critical_cycles(l.g, a)) {
        CAPTURE(file);
        CAPTURE(arch_name(a));
        CHECK(is_critical_cycle(l.g, c, a));
      }
  }
}

TEST_CASE("tampered cycles fail re-validation") {
  Loaded l = load("sb.wmm");
  auto cycles = find_critical_cycles(l.g, Arch::TSO);
  REQUIRE(cycles.size() == 1);
  CriticalCycle c = cycles[0];
  // Dropping an event breaks the chain.
  CriticalCycle shorter = c;
  shorter.events.pop_back();
  CHECK(!is_critical_cycle(l.g, shorter, Arch::TSO));
  // The pairs are not relaxed on SC.
  CHECK(!is_critical_cycle(l.g, c, Arch::SC));
  // Splitting a thread's two accesses apart breaks the segment shape.
  CriticalCycle scrambled = c;
  scrambled.events = {0, 2, 1, 3};
  CHECK(!is_critical_cycle(l.g, scrambled, Arch::TSO));
  // Repeating an event is rejected outright.
  CriticalCycle repeated = c;
  repeated.events = {0, 1, 2, 0};
  CHECK(!is_critical_cycle(l.g, repeated, Arch::TSO));
}

TEST_CASE("cycle cap: short caps miss long cycles and say so") {
  Loaded l = load("iriw.wmm");
  bool cap_hit = false;
  auto cycles = find_critical_cycles(l.g, Arch::POWER, 4, &cap_hit);
  CHECK(cycles.empty());
  CHECK(cap_hit);
  cap_hit = false;
  auto full = find_critical_cycles(l.g, Arch::POWER, 8, &cap_hit);
  CHECK(full.size() == 1);
  CHECK(!cap_hit);
}

TEST_CASE("selection: all pairs vs greedy hitting set on sb") {
  Loaded l = load("sb.wmm");
  auto cycles = find_critical_cycles(l.g, Arch::TSO);
  DelaySelection all = select_pairs(cycles, Strategy::All);
  CHECK(all.strategy == Strategy::All);
  CHECK(selection_triples(all) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1},
                          {PairRole::PoPair, 2, 3}}));
  DelaySelection one = select_pairs(cycles, Strategy::OnePerCycle);
  CHECK(one.strategy == Strategy::OnePerCycle);
  // One cycle, ties break towards the smallest pair.
  CHECK(selection_triples(one) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1}}));
}

TEST_CASE("selection: frozen picks on mp and iriw+dps") {
  Loaded mp = load("mp.wmm");
  DelaySelection mp_one =
      select_pairs(find_critical_cycles(mp.g, Arch::POWER),
                   Strategy::OnePerCycle);
  CHECK(selection_triples(mp_one) ==
        std::set<Triple>({{PairRole::PoPair, 0, 1}}));
  Loaded iriw = load("iriw+dps.wmm");
  DelaySelection ir_one =
      select_pairs(find_critical_cycles(iriw.g, Arch::POWER),
                   Strategy::OnePerCycle);
  CHECK(selection_triples(ir_one) ==
        std::set<Triple>({{PairRole::RfePair, 4, 0}}));
}

TEST_CASE("selection output is sorted and empty selections are empty") {
  Loaded l = load("pgsql.wmm");
  for (Strategy s : {Strategy::All, Strategy::OnePerCycle}) {
    DelaySelection sel =
        select_pairs(find_critical_cycles(l.g, Arch::POWER), s);
    for (size_t i = 1; i < sel.pairs.size(); ++i) {
      auto key = [](const DelayPair& p) { return std::make_pair(p.e1, p.e2); };
      CHECK(key(sel.pairs[i - 1]) < key(sel.pairs[i]));
    }
  }
  CHECK(select_pairs({}, Strategy::All).pairs.empty());
  CHECK(select_pairs({}, Strategy::OnePerCycle).pairs.empty());
}

TEST_CASE("worker ring: cycle census and frozen greedy selection") {
  Loaded l = load("pgsql.wmm");
  REQUIRE(l.g.n() == 16);
  auto power = find_critical_cycles(l.g, Arch::POWER);
  CHECK(power.size() == 52);
  // Load buffering shape between the two workers.
  CHECK(has_cycle_with_lines(l.g, power, {12, 15, 26, 29}));
  // Message passing shapes: writer side and reader side.
  CHECK(has_cycle_with_lines(l.g, power, {15, 16, 21}));
  CHECK(has_cycle_with_lines(l.g, power, {7, 12, 29, 30}));
  DelaySelection all = select_pairs(power, Strategy::All);
  CHECK(all.pairs.size() == 34);
  DelaySelection one = select_pairs(power, Strategy::OnePerCycle);
  CHECK(selection_triples(one) ==
        std::set<Triple>({{PairRole::PoPair, 6, 7},
                          {PairRole::RfePair, 6, 10},
                          {PairRole::RfePair, 6, 12},
                          {PairRole::RfePair, 7, 8},
                          {PairRole::RfePair, 7, 9},
                          {PairRole::PoPair, 11, 14},
                          {PairRole::PoPair, 11, 15},
                          {PairRole::PoPair, 13, 14},
                          {PairRole::PoPair, 13, 15},
                          {PairRole::PoPair, 14, 15}}));
  // Every cycle is hit by the greedy selection.
  for (const CriticalCycle& c : power) {
    bool hit = false;
    for (const CyclePair& p : c.pairs)
      for (const DelayPair& d : one.pairs)
        if (d.e1 == p.e1 && d.e2 == p.e2 && d.role == p.role) hit = true;
    CHECK(hit);
  }
}

TEST_CASE("patched worker ring: frozen greedy selection") {
  Loaded l = load("pgsql+patch.wmm");
  REQUIRE(l.g.n() == 14);
  auto power = find_critical_cycles(l.g, Arch::POWER);
  CHECK(power.size() == 6);
  DelaySelection one = select_pairs(power, Strategy::OnePerCycle);
  CHECK(selection_triples(one) ==
        std::set<Triple>({{PairRole::PoPair, 2, 3},
                          {PairRole::PoPair, 4, 5},
                          {PairRole::PoPair, 9, 10},
                          {PairRole::RfePair, 12, 3}}));
  // TSO sees plain store buffering between the workers.
  auto tso = find_critical_cycles(l.g, Arch::TSO);
  DelaySelection tso_all = select_pairs(tso, Strategy::All);
  DelaySelection tso_one = select_pairs(tso, Strategy::OnePerCycle);
  CHECK(tso_all.pairs.size() == 2);
  CHECK(tso_one.pairs.size() == 2);
}

TEST_CASE("DOT export names events and draws the graph") {
  Loaded l = load("sb.wmm");
  auto cycles = find_critical_cycles(l.g, Arch::TSO);
  std::string dot = dot_export(l.g, cycles);
  CHECK(dot.find("digraph") != std::string::npos);
  for (const char* letter : {"a", "b", "c", "d"})
    CHECK(dot.find(letter) != std::string::npos);
  CHECK(dot.find("->") != std::string::npos);
  CHECK(dot.find("dashed") != std::string::npos);  // competing edges
  CHECK(dot.find("x") != std::string::npos);       // locations in labels
}

TEST_CASE("concrete cycles of a witnessed execution") {
  Program p = parse_file(CORPUS_DIR "/sb.wmm");
  Cfg cfg = build_cfg(p);
  auto structures = enumerate_structures(p, cfg);
  bool found_forbidden = false;
  for (const TraceStructure& ts : structures) {
    for (const Witness& x : enumerate_witnesses(ts.es)) {
      bool sc_valid = valid(ts.es, x, Arch::SC);
      auto cycles = concrete_critical_cycles(ts.es, x, Arch::TSO);
      // SC-valid executions have no concrete critical cycle; the forbidden
      // one has exactly the store-buffering cycle.
      if (sc_valid) {
        CHECK(cycles.empty());
      } else {
        found_forbidden = true;
        REQUIRE(cycles.size() == 1);
        CHECK(cycles[0].events.size() == 4);
        std::set<Triple> triples = cycle_triples(cycles[0]);
        REQUIRE(triples.size() == 2);
        for (const auto& [role, e1, e2] : triples) {
          CHECK(role == PairRole::PoPair);
          CHECK(ts.es.is_po(e1, e2));
        }
      }
    }
  }
  CHECK(found_forbidden);
}

TEST_CASE("concrete cycles: cumulativity neutralises fenced rfe") {
  // mp+lwfence is safe on POWER only through cumulativity: the rfe pair of
  // the forbidden execution sits next to a cumulative fence inside the
  // cycle, so it is not treated as relaxed there.
  Program p = parse_file(CORPUS_DIR "/mp+lwfence.wmm");
  Cfg cfg = build_cfg(p);
  for (const TraceStructure& ts : enumerate_structures(p, cfg))
    for (const Witness& x : enumerate_witnesses(ts.es))
      CHECK(concrete_critical_cycles(ts.es, x, Arch::POWER).empty());
  // Without the fences the forbidden execution has its cycle.
  Program q = parse_file(CORPUS_DIR "/mp.wmm");
  Cfg qcfg = build_cfg(q);
  bool any = false;
  for (const TraceStructure& ts : enumerate_structures(q, qcfg))
    for (const Witness& x : enumerate_witnesses(ts.es))
      if (!valid(ts.es, x, Arch::SC) && valid(ts.es, x, Arch::POWER)) {
        any = true;
        CHECK(!concrete_critical_cycles(ts.es, x, Arch::POWER).empty());
      }
  CHECK(any);
}
