#include "wmm/event_graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "wmm/dp.hpp"

namespace wmm {

bool EventGraph::is_dp(int e1, int e2) const {
  for (auto& [a, b] : dp)
    if (a == e1 && b == e2) return true;
  return false;
}

bool EventGraph::is_cmp(int e1, int e2) const {
  if (e1 > e2) std::swap(e1, e2);
  for (auto& [a, b] : cmp)
    if (a == e1 && b == e2) return true;
  return false;
}

int EventGraph::event_of_node(int cfg_node) const {
  for (const AbstractEvent& e : events)
    if (e.cfg_node == cfg_node) return e.id;
  return -1;
}

bool CyclePair::relaxed(Arch a) const {
  return std::find(relaxed_on.begin(), relaxed_on.end(), a) !=
         relaxed_on.end();
}

std::string event_letter(int id) {
  if (id >= 0 && id < 26) return std::string(1, static_cast<char>('a' + id));
  return "e" + std::to_string(id);
}

namespace {

// True when to is reachable from from by one or more CFG edges without
// passing through a node the blocked predicate accepts.
template <typename Blocked>
bool reaches_avoiding(const Cfg& cfg, int from, int to, Blocked blocked) {
  std::deque<int> work;
  std::set<int> seen;
  for (int s : cfg.nodes[static_cast<size_t>(from)].succ)
    if (seen.insert(s).second) work.push_back(s);
  while (!work.empty()) {
    int id = work.front();
    work.pop_front();
    if (id == to) return true;
    if (blocked(cfg.nodes[static_cast<size_t>(id)])) continue;
    for (int s : cfg.nodes[static_cast<size_t>(id)].succ)
      if (seen.insert(s).second) work.push_back(s);
  }
  return false;
}

FenceKind guaranteed_fence(const Cfg& cfg, int from, int to) {
  if (reaches_avoiding(cfg, from, to, [](const CfgNode& n) {
        return n.fence() != FenceKind::None;
      }))
    return FenceKind::None;
  if (reaches_avoiding(cfg, from, to, [](const CfgNode& n) {
        return n.fence() == FenceKind::Full;
      }))
    return FenceKind::Lw;
  return FenceKind::Full;
}

}  // namespace

EventGraph build_event_graph(const Program& p, const Cfg& cfg) {
  EventGraph g;
  for (int t = 0; t < static_cast<int>(p.threads.size()); ++t) {
    for (int node : cfg.access_nodes(t)) {
      const CfgNode& n = cfg.nodes[static_cast<size_t>(node)];
      AbstractEvent e;
      e.id = g.n();
      e.is_write = n.is_write();
      e.loc = n.stmt->loc;
      e.proc = t;
      e.cfg_node = node;
      e.line = n.line();
      g.events.push_back(std::move(e));
    }
  }

  int n = g.n();
  g.po.assign(static_cast<size_t>(n),
              std::vector<bool>(static_cast<size_t>(n), false));
  g.po_fence.assign(static_cast<size_t>(n),
                    std::vector<FenceKind>(static_cast<size_t>(n),
                                           FenceKind::None));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || g.events[static_cast<size_t>(i)].proc !=
                        g.events[static_cast<size_t>(j)].proc)
        continue;
      int ni = g.events[static_cast<size_t>(i)].cfg_node;
      int nj = g.events[static_cast<size_t>(j)].cfg_node;
      if (!cfg.reaches(ni, nj)) continue;
      g.po[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
      g.po_fence[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          guaranteed_fence(cfg, ni, nj);
    }
  }

  for (auto& [n1, n2] : static_dp(p, cfg)) {
    int e1 = g.event_of_node(n1);
    int e2 = g.event_of_node(n2);
    if (e1 >= 0 && e2 >= 0 && e1 != e2) g.dp.push_back({e1, e2});
  }
  std::sort(g.dp.begin(), g.dp.end());

  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const AbstractEvent& a = g.events[static_cast<size_t>(i)];
      const AbstractEvent& b = g.events[static_cast<size_t>(j)];
      if (a.proc != b.proc && a.loc == b.loc && (a.is_write || b.is_write))
        g.cmp.push_back({i, j});
    }
  return g;
}

namespace {

enum class CommKind { None, Rf, Fr, Ws };

// Common view for the abstract graph and a concrete witnessed structure.
struct CycleSpace {
  virtual ~CycleSpace() = default;
  virtual int size() const = 0;
  virtual bool excluded(int e) const = 0;
  virtual bool is_write(int e) const = 0;
  virtual Loc loc(int e) const = 0;
  virtual int proc(int e) const = 0;
  virtual bool po_edge(int u, int v) const = 0;
  virtual FenceKind po_fence_of(int u, int v) const = 0;
  virtual bool has_dp(int u, int v) const = 0;
  virtual CommKind comm(int u, int v) const = 0;  // cross-proc only
  virtual bool reflect() const = 0;
};

struct AbstractSpace : CycleSpace {
  const EventGraph& g;
  explicit AbstractSpace(const EventGraph& gr) : g(gr) {}
  int size() const override { return g.n(); }
  bool excluded(int) const override { return false; }
  bool is_write(int e) const override {
    return g.events[static_cast<size_t>(e)].is_write;
  }
  Loc loc(int e) const override { return g.events[static_cast<size_t>(e)].loc; }
  int proc(int e) const override {
    return g.events[static_cast<size_t>(e)].proc;
  }
  bool po_edge(int u, int v) const override { return g.is_po(u, v); }
  FenceKind po_fence_of(int u, int v) const override {
    return g.po_fence[static_cast<size_t>(u)][static_cast<size_t>(v)];
  }
  bool has_dp(int u, int v) const override { return g.is_dp(u, v); }
  CommKind comm(int u, int v) const override {
    if (!g.is_cmp(u, v)) return CommKind::None;
    bool wu = is_write(u);
    bool wv = is_write(v);
    if (wu && !wv) return CommKind::Rf;
    if (!wu && wv) return CommKind::Fr;
    if (wu && wv) return CommKind::Ws;
    return CommKind::None;
  }
  bool reflect() const override { return true; }
};

struct ConcreteSpace : CycleSpace {
  const EventStructure& e;
  const Witness& x;
  std::set<std::pair<int, int>> fr;
  ConcreteSpace(const EventStructure& es, const Witness& w) : e(es), x(w) {
    for (auto& p : derive_fr(es, w)) fr.insert(p);
  }
  int size() const override { return e.n(); }
  bool excluded(int ev) const override { return e.ev(ev).is_init(); }
  bool is_write(int ev) const override { return e.ev(ev).is_write; }
  Loc loc(int ev) const override { return e.ev(ev).loc; }
  int proc(int ev) const override { return e.ev(ev).proc; }
  bool po_edge(int u, int v) const override { return e.is_po(u, v); }
  FenceKind po_fence_of(int u, int v) const override {
    return e.fence_between(u, v);
  }
  bool has_dp(int u, int v) const override { return e.is_dp(u, v); }
  CommKind comm(int u, int v) const override {
    if (e.ev(v).is_read() && x.rf[static_cast<size_t>(v)] == u)
      return CommKind::Rf;
    if (fr.count({u, v})) return CommKind::Fr;
    if (e.ev(u).is_write && e.ev(v).is_write && loc(u) == loc(v) &&
        x.ws_before(loc(u), u, v))
      return CommKind::Ws;
    return CommKind::None;
  }
  bool reflect() const override { return false; }
};

struct CycleSearch {
  const CycleSpace& sp;
  int max_len;
  bool cap_hit = false;
  std::map<std::vector<int>, CriticalCycle> buckets;

  std::vector<int> path;
  std::vector<bool> on_path;
  std::map<int, std::vector<int>> proc_events;  // proc -> path members
  std::map<Loc, int> loc_count;
  std::set<std::pair<int, int>> used_comm;

  CycleSearch(const CycleSpace& s, int cap) : sp(s), max_len(cap) {}

  void run() {
    on_path.assign(static_cast<size_t>(sp.size()), false);
    for (int s = 0; s < sp.size(); ++s) {
      if (sp.excluded(s)) continue;
      path = {s};
      on_path[static_cast<size_t>(s)] = true;
      proc_events[sp.proc(s)].push_back(s);
      ++loc_count[sp.loc(s)];
      extend(s, s, false);
      on_path[static_cast<size_t>(s)] = false;
      proc_events.clear();
      loc_count.clear();
    }
  }

  bool edge_ok(int u, int v, bool last_was_po, bool* used_po) const {
    if (sp.proc(u) == sp.proc(v)) {
      *used_po = true;
      return !last_was_po && sp.po_edge(u, v);
    }
    *used_po = false;
    if (sp.comm(u, v) == CommKind::None) return false;
    return !used_comm.count({std::min(u, v), std::max(u, v)});
  }

  void extend(int s, int u, bool last_was_po) {
    bool used_po = false;
    if (static_cast<int>(path.size()) >= 3 &&
        edge_ok(u, s, last_was_po, &used_po))
      complete();

    for (int v = s + 1; v < sp.size(); ++v) {
      if (sp.excluded(v) || on_path[static_cast<size_t>(v)]) continue;
      if (!edge_ok(u, v, last_was_po, &used_po)) continue;
      auto& pe = proc_events[sp.proc(v)];
      if (pe.size() >= 2) continue;
      if (pe.size() == 1 && sp.loc(pe[0]) == sp.loc(v)) continue;
      auto lc = loc_count.find(sp.loc(v));
      if (lc != loc_count.end() && lc->second >= 3) continue;
      if (static_cast<int>(path.size()) == max_len) {
        cap_hit = true;
        continue;
      }

      path.push_back(v);
      on_path[static_cast<size_t>(v)] = true;
      pe.push_back(v);
      ++loc_count[sp.loc(v)];
      if (!used_po) used_comm.insert({std::min(u, v), std::max(u, v)});
      extend(s, v, used_po);
      if (!used_po) used_comm.erase({std::min(u, v), std::max(u, v)});
      --loc_count[sp.loc(v)];
      pe.pop_back();
      on_path[static_cast<size_t>(v)] = false;
      path.pop_back();
    }
  }

  void complete() {
    int len = static_cast<int>(path.size());
    // Each processor's accesses must be circularly contiguous.
    for (auto& [proc, evs] : proc_events) {
      (void)proc;
      if (evs.size() != 2) continue;
      int i = index_of(evs[0]);
      int j = index_of(evs[1]);
      int d = (j - i + len) % len;
      if (d != 1 && d != len - 1) return;
    }
    // Each location needs a write among its accesses.
    std::map<Loc, bool> has_write;
    for (int e : path) {
      bool& w = has_write[sp.loc(e)];
      w = w || sp.is_write(e);
    }
    for (auto& [loc, w] : has_write) {
      (void)loc;
      if (!w) return;
    }

    std::vector<CyclePair> pairs = orientation_pairs(path);
    if (pairs.empty()) return;

    std::vector<int> key = path;
    if (sp.reflect()) {
      std::vector<int> rev;
      rev.push_back(path[0]);
      for (int i = len - 1; i >= 1; --i)
        rev.push_back(path[static_cast<size_t>(i)]);
      if (rev < key) key = std::move(rev);
    }
    CriticalCycle& c = buckets[key];
    c.events = key;
    for (CyclePair& p : pairs) merge_pair(c, std::move(p));
  }

  int index_of(int e) const {
    for (int i = 0; i < static_cast<int>(path.size()); ++i)
      if (path[static_cast<size_t>(i)] == e) return i;
    return -1;
  }

  std::vector<CyclePair> orientation_pairs(const std::vector<int>& seq) const {
    int len = static_cast<int>(seq.size());
    std::vector<CyclePair> out;
    for (int i = 0; i < len; ++i) {
      int u = seq[static_cast<size_t>(i)];
      int v = seq[static_cast<size_t>((i + 1) % len)];
      if (sp.proc(u) == sp.proc(v)) {
        PairKind kind = pair_kind(sp.is_write(u), sp.is_write(v));
        FenceKind f = sp.po_fence_of(u, v);
        bool dp = sp.has_dp(u, v);
        CyclePair p;
        p.role = PairRole::PoPair;
        p.e1 = u;
        p.e2 = v;
        for (Arch a : kAllArchs)
          if (!safe_po(a, kind, dp, false, f)) p.relaxed_on.push_back(a);
        if (!p.relaxed_on.empty()) out.push_back(std::move(p));
      } else if (sp.comm(u, v) == CommKind::Rf) {
        int prev = seq[static_cast<size_t>((i - 1 + len) % len)];
        int next = seq[static_cast<size_t>((i + 2) % len)];
        bool neutral = false;
        if (sp.proc(v) == sp.proc(next) &&
            fence_cumulative(sp.po_fence_of(v, next)))
          neutral = true;  // fence after the read orders (u, next)
        if (sp.proc(prev) == sp.proc(u) &&
            fence_cumulative(sp.po_fence_of(prev, u)))
          neutral = true;  // fence before the write orders (prev, v)
        if (!neutral) {
          CyclePair p;
          p.role = PairRole::RfePair;
          p.e1 = u;
          p.e2 = v;
          for (Arch a : kAllArchs)
            if (!rfe_safe(a)) p.relaxed_on.push_back(a);
          out.push_back(std::move(p));
        }
      }
    }
    return out;
  }

  static void merge_pair(CriticalCycle& c, CyclePair p) {
    for (CyclePair& q : c.pairs) {
      if (q.role == p.role && q.e1 == p.e1 && q.e2 == p.e2) {
        for (Arch a : p.relaxed_on)
          if (!q.relaxed(a)) q.relaxed_on.push_back(a);
        std::sort(q.relaxed_on.begin(), q.relaxed_on.end(),
                  [](Arch x, Arch y) {
                    return static_cast<int>(x) < static_cast<int>(y);
                  });
        return;
      }
    }
    c.pairs.push_back(std::move(p));
  }
};

CycleEnumeration run_search(const CycleSpace& sp, int max_len) {
  CycleSearch search(sp, max_len);
  search.run();
  CycleEnumeration out;
  out.cap_hit = search.cap_hit;
  for (auto& [key, cycle] : search.buckets) {
    (void)key;
    if (cycle.pairs.empty()) continue;
    std::sort(cycle.pairs.begin(), cycle.pairs.end(),
              [](const CyclePair& a, const CyclePair& b) {
                if (a.e1 != b.e1) return a.e1 < b.e1;
                if (a.e2 != b.e2) return a.e2 < b.e2;
                return static_cast<int>(a.role) < static_cast<int>(b.role);
              });
    out.cycles.push_back(std::move(cycle));
  }
  return out;
}

}  // namespace

CycleEnumeration enumerate_cycles(const EventGraph& g, int max_len) {
  AbstractSpace sp(g);
  return run_search(sp, max_len);
}

std::vector<CriticalCycle> find_critical_cycles(const EventGraph& g, Arch a,
                                                int max_len, bool* cap_hit) {
  CycleEnumeration all = enumerate_cycles(g, max_len);
  if (cap_hit) *cap_hit = all.cap_hit;
  std::vector<CriticalCycle> out;
  for (CriticalCycle& c : all.cycles) {
    CriticalCycle keep;
    keep.events = c.events;
    for (CyclePair& p : c.pairs)
      if (p.relaxed(a)) keep.pairs.push_back(p);
    if (!keep.pairs.empty()) out.push_back(std::move(keep));
  }
  return out;
}

bool is_critical_cycle(const EventGraph& g, const CriticalCycle& c, Arch a) {
  int len = static_cast<int>(c.events.size());
  if (len < 3 || len > static_cast<int>(g.events.size())) return false;
  std::set<int> distinct(c.events.begin(), c.events.end());
  if (static_cast<int>(distinct.size()) != len) return false;
  for (int e : c.events)
    if (e < 0 || e >= g.n()) return false;

  std::map<int, std::vector<int>> per_proc;
  std::map<Loc, std::vector<int>> per_loc;
  for (int i = 0; i < len; ++i) {
    int e = c.events[static_cast<size_t>(i)];
    per_proc[g.events[static_cast<size_t>(e)].proc].push_back(i);
    per_loc[g.events[static_cast<size_t>(e)].loc].push_back(i);
  }
  for (auto& [proc, idxs] : per_proc) {
    (void)proc;
    if (idxs.size() > 2) return false;
    if (idxs.size() == 2) {
      int d = (idxs[1] - idxs[0] + len) % len;
      if (d != 1 && d != len - 1) return false;
      const AbstractEvent& x = g.events[static_cast<size_t>(
          c.events[static_cast<size_t>(idxs[0])])];
      const AbstractEvent& y = g.events[static_cast<size_t>(
          c.events[static_cast<size_t>(idxs[1])])];
      if (x.loc == y.loc) return false;
    }
  }
  for (auto& [loc, idxs] : per_loc) {
    (void)loc;
    if (idxs.size() > 3) return false;
    bool has_write = false;
    for (int i : idxs)
      has_write |= g.events[static_cast<size_t>(
                                c.events[static_cast<size_t>(i)])]
                       .is_write;
    if (!has_write) return false;
  }

  // Adjacent same-thread members need a po edge in some direction; others
  // need a competing edge.
  for (int i = 0; i < len; ++i) {
    int u = c.events[static_cast<size_t>(i)];
    int v = c.events[static_cast<size_t>((i + 1) % len)];
    const AbstractEvent& eu = g.events[static_cast<size_t>(u)];
    const AbstractEvent& ev = g.events[static_cast<size_t>(v)];
    if (eu.proc == ev.proc) {
      if (!g.is_po(u, v) && !g.is_po(v, u)) return false;
    } else {
      if (!g.is_cmp(u, v)) return false;
      if (!eu.is_write && !ev.is_write) return false;
    }
  }

  // At least one delay pair relaxed on a, recomputed over every
  // traversable orientation.
  AbstractSpace sp(g);
  CycleSearch search(sp, len);
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<int> seq = c.events;
    if (dir == 1) {
      std::vector<int> rev;
      rev.push_back(seq[0]);
      for (int i = len - 1; i >= 1; --i)
        rev.push_back(seq[static_cast<size_t>(i)]);
      seq = std::move(rev);
    }
    bool traversable = true;
    for (int i = 0; i < len && traversable; ++i) {
      int u = seq[static_cast<size_t>(i)];
      int v = seq[static_cast<size_t>((i + 1) % len)];
      if (g.events[static_cast<size_t>(u)].proc ==
          g.events[static_cast<size_t>(v)].proc)
        traversable = g.is_po(u, v);
      else
        traversable = sp.comm(u, v) != CommKind::None;
    }
    if (!traversable) continue;
    for (const CyclePair& p : search.orientation_pairs(seq))
      if (p.relaxed(a)) return true;
  }
  return false;
}

DelaySelection select_pairs(const std::vector<CriticalCycle>& cycles,
                            Strategy strategy) {
  DelaySelection sel;
  sel.strategy = strategy;
  auto less = [](const DelayPair& a, const DelayPair& b) {
    if (a.e1 != b.e1) return a.e1 < b.e1;
    if (a.e2 != b.e2) return a.e2 < b.e2;
    return static_cast<int>(a.role) < static_cast<int>(b.role);
  };

  if (strategy == Strategy::All) {
    std::set<std::tuple<int, int, int>> seen;
    for (const CriticalCycle& c : cycles)
      for (const CyclePair& p : c.pairs)
        if (seen.insert({p.e1, p.e2, static_cast<int>(p.role)}).second)
          sel.pairs.push_back({p.role, p.e1, p.e2});
    std::sort(sel.pairs.begin(), sel.pairs.end(), less);
    return sel;
  }

  std::vector<bool> covered(cycles.size(), false);
  size_t remaining = cycles.size();
  while (remaining > 0) {
    // Pair covering the most uncovered cycles, ties to smallest ids.
    DelayPair best;
    int best_count = 0;
    for (const CriticalCycle& c : cycles)
      for (const CyclePair& p : c.pairs) {
        DelayPair cand{p.role, p.e1, p.e2};
        int count = 0;
        for (size_t i = 0; i < cycles.size(); ++i) {
          if (covered[i]) continue;
          for (const CyclePair& q : cycles[i].pairs)
            if (q.role == cand.role && q.e1 == cand.e1 && q.e2 == cand.e2) {
              ++count;
              break;
            }
        }
        if (count > best_count ||
            (count == best_count && count > 0 && less(cand, best))) {
          best = cand;
          best_count = count;
        }
      }
    if (best_count == 0) break;  // unreachable: every cycle has a pair
    sel.pairs.push_back(best);
    for (size_t i = 0; i < cycles.size(); ++i) {
      if (covered[i]) continue;
      for (const CyclePair& q : cycles[i].pairs)
        if (q.role == best.role && q.e1 == best.e1 && q.e2 == best.e2) {
          covered[i] = true;
          --remaining;
          break;
        }
    }
  }
  std::sort(sel.pairs.begin(), sel.pairs.end(), less);
  return sel;
}

std::string dot_export(const EventGraph& g,
                       const std::vector<CriticalCycle>& cycles) {
  std::set<int> members;
  for (const CriticalCycle& c : cycles)
    members.insert(c.events.begin(), c.events.end());

  std::ostringstream os;
  os << "digraph events {\n";
  os << "  rankdir=LR;\n";
  os << "  node [shape=box fontname=\"monospace\"];\n";
  for (int i = 0; i < static_cast<int>(cycles.size()); ++i) {
    os << "  // cycle " << i << ":";
    for (int e : cycles[static_cast<size_t>(i)].events)
      os << ' ' << event_letter(e);
    os << " | lines:";
    for (int e : cycles[static_cast<size_t>(i)].events)
      os << ' ' << g.events[static_cast<size_t>(e)].line;
    os << "\n";
  }
  for (const AbstractEvent& e : g.events) {
    os << "  e" << e.id << " [label=\"" << event_letter(e.id) << ": "
       << (e.is_write ? 'W' : 'R') << ' ' << e.loc.str() << " [line "
       << e.line << "]\"";
    if (members.count(e.id)) os << " color=red penwidth=2";
    os << "];\n";
  }
  // po cover edges (transitive reduction), dp edges labelled.
  for (int u = 0; u < g.n(); ++u) {
    for (int v = 0; v < g.n(); ++v) {
      if (u == v || !g.is_po(u, v)) continue;
      bool covered = false;
      for (int w = 0; w < g.n() && !covered; ++w)
        covered = w != u && w != v && g.is_po(u, w) && g.is_po(w, v);
      bool dp = g.is_dp(u, v);
      if (covered && !dp) continue;
      os << "  e" << u << " -> e" << v;
      if (dp) os << " [label=\"dp\"]";
      os << ";\n";
    }
  }
  for (auto& [a, b] : g.cmp)
    os << "  e" << a << " -> e" << b << " [style=dashed dir=none];\n";
  os << "}\n";
  return os.str();
}

std::vector<CriticalCycle> concrete_critical_cycles(const EventStructure& e,
                                                    const Witness& x, Arch a,
                                                    int max_len) {
  ConcreteSpace sp(e, x);
  CycleEnumeration all = run_search(sp, max_len);
  std::vector<CriticalCycle> out;
  for (CriticalCycle& c : all.cycles) {
    CriticalCycle keep;
    keep.events = c.events;
    for (CyclePair& p : c.pairs)
      if (p.relaxed(a)) keep.pairs.push_back(p);
    if (!keep.pairs.empty()) out.push_back(std::move(keep));
  }
  return out;
}

}  // namespace wmm
