#include "wmm/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "wmm/arch.hpp"

namespace wmm {
namespace {

using nlohmann::json;

const char* pair_kind_name(PairRole r) {
  return r == PairRole::PoPair ? "po" : "rfe";
}

}  // namespace

json verdict_json(const Verdict& v) {
  json j;
  j["status"] = verdict_name(v.status);
  j["states"] = v.states;
  j["depth"] = v.depth;
  j["truncated"] = v.truncated;
  j["bound_hits"] = v.bound_hits;
  j["trace"] = json::array();
  for (const TraceStep& s : v.trace)
    j["trace"].push_back({{"thread", s.thread},
                          {"line", s.line},
                          {"stmt", s.stmt},
                          {"choice", s.choice}});
  if (v.status != VerdictStatus::Safe) {
    json f;
    f["line"] = v.failure.line;
    f["memory"] = v.failure.memory;
    f["registers"] = v.failure.registers;
    j["failure"] = f;
  }
  return j;
}

std::vector<TraceStep> trace_from_json(const json& j) {
  std::vector<TraceStep> trace;
  const json& arr = j.contains("trace") ? j.at("trace") : j;
  for (const json& e : arr) {
    TraceStep s;
    s.thread = e.at("thread").get<int>();
    s.line = e.at("line").get<int>();
    s.stmt = e.at("stmt").get<std::string>();
    s.choice = e.at("choice").get<int>();
    trace.push_back(std::move(s));
  }
  return trace;
}

json cycles_json(const EventGraph& g,
                 const std::vector<CriticalCycle>& cycles) {
  json out = json::array();
  for (const CriticalCycle& c : cycles) {
    json jc;
    jc["events"] = json::array();
    std::set<int> lines;
    for (int e : c.events) {
      jc["events"].push_back(event_letter(e));
      lines.insert(g.events[static_cast<size_t>(e)].line);
    }
    jc["lines"] = lines;
    jc["pairs"] = json::array();
    for (const CyclePair& p : c.pairs) {
      json jp;
      jp["kind"] = pair_kind_name(p.role);
      jp["e1"] = event_letter(p.e1);
      jp["e2"] = event_letter(p.e2);
      jp["relaxed_on"] = json::array();
      for (Arch a : p.relaxed_on) jp["relaxed_on"].push_back(arch_name(a));
      jc["pairs"].push_back(jp);
    }
    out.push_back(jc);
  }
  return out;
}

json selection_json(const DelaySelection& sel) {
  json j;
  j["strategy"] =
      sel.strategy == Strategy::All ? "all" : "one-per-cycle";
  j["pairs"] = json::array();
  for (const DelayPair& p : sel.pairs)
    j["pairs"].push_back({{"kind", pair_kind_name(p.role)},
                          {"e1", event_letter(p.e1)},
                          {"e2", event_letter(p.e2)}});
  return j;
}

std::map<std::string, std::map<std::string, std::string>> load_expected(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j = json::parse(in);
  std::map<std::string, std::map<std::string, std::string>> out;
  for (auto& [file, models] : j.items())
    for (auto& [model, verdict] : models.items())
      out[file][model] = verdict.get<std::string>();
  return out;
}

}  // namespace wmm
