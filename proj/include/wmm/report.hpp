#ifndef WMM_REPORT_HPP
#define WMM_REPORT_HPP

// JSON rendering of verdicts, critical cycles, and delay selections, plus
// the loader for a corpus expectation table.  Traces serialise losslessly:
// a verdict written with verdict_json can be replayed after reading its
// trace back with trace_from_json.

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmm/event_graph.hpp"
#include "wmm/explorer.hpp"

namespace wmm {

nlohmann::json verdict_json(const Verdict& v);
std::vector<TraceStep> trace_from_json(const nlohmann::json& j);

// [{events: ["a", ...], lines: [...], pairs: [{kind, e1, e2, relaxed_on}]}]
nlohmann::json cycles_json(const EventGraph& g,
                           const std::vector<CriticalCycle>& cycles);

// {strategy, pairs: [{kind, e1, e2}]} with events named by letter
nlohmann::json selection_json(const DelaySelection& sel);

// filename -> model name -> "safe" | "violated"
std::map<std::string, std::map<std::string, std::string>> load_expected(
    const std::string& path);

}  // namespace wmm

#endif  // WMM_REPORT_HPP
