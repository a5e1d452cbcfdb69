// Command-line front end: parse a program, build its abstract event graph,
// enumerate critical cycles for a memory model, select delay pairs, rewrite
// the program with explicit buffers and delayed reads, and explore the
// result.  Exit codes mirror the explorer: 0 safe, 1 violated,
// 2 bound_exceeded; anything above 2 is a usage or input error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wmm/arch.hpp"
#include "wmm/axiomatic.hpp"
#include "wmm/cfg.hpp"
#include "wmm/event_graph.hpp"
#include "wmm/exec_enum.hpp"
#include "wmm/explorer.hpp"
#include "wmm/machine.hpp"
#include "wmm/parser.hpp"
#include "wmm/printer.hpp"
#include "wmm/report.hpp"
#include "wmm/transform.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string model = "sc";
  std::string pairs = "all";
  int unwind = 2;
  long long max_steps = 1000000;
  std::string json_path;
  std::string dump_path;
  std::string dot_path;
  std::string action;
  std::string input;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

void write_json(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string selection_text(const wmm::DelaySelection& sel) {
  if (sel.pairs.empty()) return "(none)";
  std::string s;
  for (const wmm::DelayPair& p : sel.pairs) {
    if (!s.empty()) s += " ";
    s += "(" + wmm::event_letter(p.e1) + "," + wmm::event_letter(p.e2) + ")";
  }
  return s;
}

struct Pipeline {
  wmm::Program prog;
  wmm::Cfg cfg;
  wmm::EventGraph graph;
  std::vector<wmm::CriticalCycle> cycles;
  bool cap_hit = false;
  wmm::DelaySelection sel;
};

Pipeline run_pipeline(const std::string& path, wmm::Arch model,
                      wmm::Strategy strat) {
  Pipeline pl;
  pl.prog = wmm::parse_file(path);
  pl.cfg = wmm::build_cfg(pl.prog);
  pl.graph = wmm::build_event_graph(pl.prog, pl.cfg);
  pl.cycles = wmm::find_critical_cycles(pl.graph, model, 8, &pl.cap_hit);
  pl.sel = wmm::select_pairs(pl.cycles, strat);
  return pl;
}

int do_graph(const Options& o, wmm::Arch model, wmm::Strategy strat) {
  Pipeline pl = run_pipeline(o.input, model, strat);
  write_text(o.dot_path, wmm::dot_export(pl.graph, pl.cycles));
  json j;
  j["model"] = wmm::arch_name(model);
  j["cap_hit"] = pl.cap_hit;
  j["cycles"] = wmm::cycles_json(pl.graph, pl.cycles);
  j["selection"] = wmm::selection_json(pl.sel);
  if (!o.json_path.empty()) write_json(o.json_path, j);
  std::cerr << "cycles: " << pl.cycles.size()
            << "  selection: " << selection_text(pl.sel) << "\n";
  return 0;
}

int do_transform(const Options& o, wmm::Arch model, wmm::Strategy strat) {
  Pipeline pl = run_pipeline(o.input, model, strat);
  wmm::TransformOutput t =
      wmm::transform(pl.prog, pl.cfg, pl.graph, pl.sel, model);
  write_text(o.dump_path, wmm::print_program(t.program));
  if (!o.json_path.empty()) {
    json j;
    j["model"] = wmm::arch_name(model);
    j["selection"] = wmm::selection_json(pl.sel);
    j["tagged_stores"] = t.tagged_stores;
    j["tagged_loads"] = t.tagged_loads;
    j["buffered_locs"] = json::array();
    for (const wmm::Loc& l : t.buffered_locs)
      j["buffered_locs"].push_back(l.str());
    write_json(o.json_path, j);
  }
  return 0;
}

int do_check(const Options& o, wmm::Arch model, wmm::Strategy strat) {
  Pipeline pl = run_pipeline(o.input, model, strat);
  wmm::TransformOutput t =
      wmm::transform(pl.prog, pl.cfg, pl.graph, pl.sel, model);
  if (!o.dump_path.empty())
    write_text(o.dump_path, wmm::print_program(t.program));

  wmm::ExploreBounds bounds;
  bounds.loop_unwind = o.unwind;
  bounds.max_steps = o.max_steps;
  wmm::Verdict v = wmm::explore(t.program, bounds);

  std::cout << "model: " << wmm::arch_name(model) << "\n"
            << "strategy: "
            << (strat == wmm::Strategy::All ? "all" : "one-per-cycle") << "\n"
            << "selection: " << selection_text(pl.sel) << "\n"
            << "verdict: " << wmm::verdict_name(v.status) << "\n";
  if (v.status == wmm::VerdictStatus::Violated)
    std::cout << "failing line: " << v.failure.line << "\n";
  std::cout << "states: " << v.states << "  depth: " << v.depth << "\n";

  if (!o.json_path.empty()) {
    json j;
    j["model"] = wmm::arch_name(model);
    j["selection"] = wmm::selection_json(pl.sel);
    j["verdict"] = wmm::verdict_json(v);
    write_json(o.json_path, j);
  }

  switch (v.status) {
    case wmm::VerdictStatus::Safe: return 0;
    case wmm::VerdictStatus::Violated: return 1;
    case wmm::VerdictStatus::BoundExceeded: return 2;
  }
  return 3;
}

int do_oracle_check(const Options& o) {
  wmm::Program prog = wmm::parse_file(o.input);
  wmm::Cfg cfg = wmm::build_cfg(prog);
  std::vector<wmm::TraceStructure> structures;
  try {
    structures = wmm::enumerate_structures(prog, cfg);
  } catch (const std::exception& e) {
    std::cerr << "oracle-check refused: " << e.what() << "\n";
    return 3;
  }

  long long checks = 0, bad = 0, witnesses = 0;
  for (const wmm::TraceStructure& ts : structures) {
    for (const wmm::Witness& x : wmm::enumerate_witnesses(ts.es)) {
      ++witnesses;
      if (!wmm::check_lemma1(ts.es, x)) {
        ++bad;
        std::cout << "lemma discrepancy (structure witness)\n";
      }
      ++checks;
      for (wmm::Arch a : wmm::kAllArchs) {
        std::vector<wmm::CriticalCycle> cc =
            wmm::concrete_critical_cycles(ts.es, x, a);
        wmm::DelaySelection sel =
            wmm::select_pairs(cc, wmm::Strategy::OnePerCycle);
        std::vector<std::pair<int, int>> pick;
        for (const wmm::DelayPair& p : sel.pairs) pick.push_back({p.e1, p.e2});
        bool t1 = wmm::check_theorem1(ts.es, x, a);
        bool t2 = wmm::check_theorem2(ts.es, x, a, pick);
        if (!t1)
          std::cout << "delayed-path equivalence fails on "
                    << wmm::arch_name(a) << "\n";
        if (!t2)
          std::cout << "sub-selection equivalence fails on "
                    << wmm::arch_name(a) << "\n";
        bad += !t1 + !t2;
        checks += 2;
      }
    }
  }
  std::cout << "structures: " << structures.size()
            << "  witnesses: " << witnesses << "  checks: " << checks
            << "  discrepancies: " << bad << "\n";
  return bad == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"weak memory model verification by SC transformation"};
  app.add_option("--model", o.model, "memory model")
      ->check(CLI::IsMember({"sc", "tso", "pso", "rmo", "power"}))
      ->capture_default_str();
  app.add_option("--pairs", o.pairs, "delay pair selection strategy")
      ->check(CLI::IsMember({"all", "one-per-cycle"}))
      ->capture_default_str();
  app.add_option("--unwind", o.unwind, "loop unwinding bound")
      ->capture_default_str();
  app.add_option("--max-steps", o.max_steps, "exploration step budget")
      ->capture_default_str();
  app.add_option("--json", o.json_path, "write a JSON report to this file");
  app.add_option("--dump", o.dump_path, "write the transformed program here");
  app.add_option("--dump-dot", o.dot_path, "write the event graph DOT here");
  app.add_option("action", o.action, "graph | transform | check | oracle-check")
      ->required()
      ->check(CLI::IsMember({"graph", "transform", "check", "oracle-check"}));
  app.add_option("input", o.input, "program file (.wmm)")->required();
  CLI11_PARSE(app, argc, argv);

  wmm::Arch model = *wmm::arch_from_name(o.model);
  wmm::Strategy strat = o.pairs == "all" ? wmm::Strategy::All
                                         : wmm::Strategy::OnePerCycle;
  try {
    if (o.action == "graph") return do_graph(o, model, strat);
    if (o.action == "transform") return do_transform(o, model, strat);
    if (o.action == "check") return do_check(o, model, strat);
    return do_oracle_check(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
