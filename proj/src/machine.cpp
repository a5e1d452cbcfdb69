#include "wmm/machine.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace wmm {

namespace {

constexpr int kMaxEvents = 12;

struct PathBuilder {
  PathConstraints pc;
  std::vector<int> pair_of;  // event id -> label pair index, -1 for initial
  std::set<std::pair<int, int>> seen;

  int dl(int ev) const { return pc.d_label(pair_of[static_cast<size_t>(ev)]); }
  int fl(int ev) const { return pc.f_label(pair_of[static_cast<size_t>(ev)]); }
  bool labelled(int ev) const { return pair_of[static_cast<size_t>(ev)] >= 0; }

  void add(int before, int after) {
    if (seen.insert({before, after}).second)
      pc.preds[static_cast<size_t>(after)].push_back(before);
  }
};

}  // namespace

PathConstraints build_path(const EventStructure& e, const Witness& x,
                           const std::vector<std::pair<int, int>>& delayed) {
  PathBuilder b;
  b.pair_of.assign(static_cast<size_t>(e.n()), -1);
  for (int id : e.non_init_ids()) {
    b.pair_of[static_cast<size_t>(id)] =
        static_cast<int>(b.pc.event_of.size());
    b.pc.event_of.push_back(id);
  }
  b.pc.preds.assign(static_cast<size_t>(b.pc.n_labels()), {});

  std::set<std::pair<int, int>> d(delayed.begin(), delayed.end());

  for (int id : e.non_init_ids()) b.add(b.dl(id), b.fl(id));

  for (auto& [e1, e2] : e.po_pairs()) {
    b.add(b.dl(e1), b.dl(e2));
    if (!d.count({e1, e2})) b.add(b.fl(e1), b.fl(e2));
  }

  for (int r = 0; r < e.n(); ++r) {
    if (!e.ev(r).is_read()) continue;
    int w = x.rf[static_cast<size_t>(r)];
    if (!b.labelled(w)) continue;
    if (d.count({w, r}))
      b.add(b.fl(r), b.fl(w));
    else
      b.add(b.fl(w), b.fl(r));
  }

  for (auto& [e1, e2] : d)
    if (e.is_po(e1, e2)) b.add(b.fl(e2), b.fl(e1));

  for (auto& [w1, w2] : ws_pairs(x))
    if (b.labelled(w1) && b.labelled(w2)) b.add(b.fl(w1), b.fl(w2));

  for (auto& [r, w] : derive_fr(e, x))
    if (b.labelled(r) && b.labelled(w)) b.add(b.fl(r), b.fl(w));

  // Cumulativity composites mirror the consensus edges: a cumulative fence
  // extends its ordering across an external read-from on either side.
  for (int r = 0; r < e.n(); ++r) {
    if (!e.ev(r).is_read()) continue;
    int w = x.rf[static_cast<size_t>(r)];
    if (!is_rfe(e, w, r)) continue;
    for (int other : e.non_init_ids()) {
      if (e.is_po(r, other) && fence_cumulative(e.fence_between(r, other)))
        b.add(b.fl(w), b.fl(other));
      if (e.is_po(other, w) && fence_cumulative(e.fence_between(other, w)))
        b.add(b.fl(other), b.fl(r));
    }
  }

  return b.pc;
}

namespace {

struct MachineState {
  std::map<Loc, int> mem;
  std::map<Loc, std::vector<int>> buff;
  std::vector<int> queue;                 // enqueue order
  std::map<std::pair<int, Loc>, int> log;
  std::vector<int> stamp;                 // entry stamp, 0 = initial time
  int counter = 0;

  std::string key() const {
    std::ostringstream os;
    for (auto& [loc, w] : mem) os << loc.str() << '=' << w << ';';
    os << '|';
    for (auto& [loc, ws] : buff) {
      os << loc.str() << ':';
      for (int w : ws) os << w << ',';
      os << ';';
    }
    os << '|';
    for (int r : queue) os << r << ',';
    os << '|';
    for (auto& [k, w] : log) os << k.first << '.' << k.second.str() << '=' << w << ';';
    os << '|';
    for (int s : stamp) os << s << ',';
    return os.str();
  }

  bool queued(int r) const {
    return std::find(queue.begin(), queue.end(), r) != queue.end();
  }
};

struct Machine {
  const EventStructure& e;
  const Witness& x;
  const PathConstraints& pc;
  std::vector<std::vector<int>> deps;  // per read, reads it must wait for

  Machine(const EventStructure& es, const Witness& w, const PathConstraints& p)
      : e(es), x(w), pc(p) {
    deps.assign(static_cast<size_t>(e.n()), {});
    for (int r = 0; r < e.n(); ++r) {
      if (!e.ev(r).is_read()) continue;
      int src = x.rf[static_cast<size_t>(r)];
      for (int rp = 0; rp < e.n(); ++rp) {
        if (!e.ev(rp).is_read()) continue;
        if (e.is_dp(rp, r) || e.is_dp(rp, src))
          deps[static_cast<size_t>(r)].push_back(rp);
      }
    }
  }

  bool step(MachineState& s, int label) const {
    int ev = pc.event_of[static_cast<size_t>(label / 2)];
    bool flush = label % 2 == 1;
    const Event& evt = e.ev(ev);
    if (evt.is_write) return flush ? flush_write(s, ev) : enter_write(s, ev);
    return flush ? flush_read(s, ev) : enqueue_read(s, ev);
  }

  bool enter_write(MachineState& s, int w) const {
    s.buff[e.ev(w).loc].push_back(w);
    s.stamp[static_cast<size_t>(w)] = ++s.counter;
    return true;
  }

  bool flush_write(MachineState& s, int w) const {
    const Loc& loc = e.ev(w).loc;
    auto& b = s.buff[loc];
    if (b.empty() || b.front() != w) return false;
    for (int r : s.queue) {
      const Event& re = e.ev(r);
      if (re.loc == loc && re.proc == e.ev(w).proc &&
          s.stamp[static_cast<size_t>(r)] < s.stamp[static_cast<size_t>(w)])
        return false;
    }
    b.erase(b.begin());
    s.mem[loc] = w;
    return true;
  }

  bool enqueue_read(MachineState& s, int r) const {
    s.queue.push_back(r);
    s.stamp[static_cast<size_t>(r)] = ++s.counter;
    return true;
  }

  bool flush_read(MachineState& s, int r) const {
    if (!s.queued(r)) return false;
    for (int rp : deps[static_cast<size_t>(r)])
      if (s.queued(rp)) return false;

    const Event& re = e.ev(r);
    const Loc& loc = re.loc;
    int w = x.rf[static_cast<size_t>(r)];
    auto& b = s.buff[loc];
    bool visible = s.mem.count(loc) && s.mem.at(loc) == w;
    if (!visible) visible = std::find(b.begin(), b.end(), w) != b.end();
    if (!visible) return false;

    // Own writes must not cross the read: a same-thread write to the same
    // location that entered after r yet sits before w in the write order
    // (or vice versa) makes the read incoherent.
    int sw = e.ev(w).is_init() ? 0 : s.stamp[static_cast<size_t>(w)];
    int sr = s.stamp[static_cast<size_t>(r)];
    for (int wp = 0; wp < e.n(); ++wp) {
      const Event& wpe = e.ev(wp);
      if (!wpe.is_write || wpe.is_init() || wp == w) continue;
      if (wpe.proc != re.proc || !(wpe.loc == loc)) continue;
      int swp = s.stamp[static_cast<size_t>(wp)];
      if (swp == 0) continue;  // not yet entered
      if (swp > sr && swp < sw) return false;
      if (swp < sr && swp > sw) return false;
    }

    auto lk = std::make_pair(re.proc, loc);
    auto it = s.log.find(lk);
    if (it != s.log.end() && w != it->second &&
        x.ws_before(loc, w, it->second))
      return false;

    s.queue.erase(std::find(s.queue.begin(), s.queue.end(), r));
    s.log[lk] = w;
    return true;
  }
};

std::string label_name(const EventStructure& e, const PathConstraints& pc,
                       int label) {
  const Event& evt = e.ev(pc.event_of[static_cast<size_t>(label / 2)]);
  std::ostringstream os;
  os << (label % 2 ? 'f' : 'd') << '(' << (evt.is_write ? 'W' : 'R')
     << evt.loc.str() << " #" << evt.id << ')';
  return os.str();
}

struct MnsSearch {
  const Machine& m;
  const PathConstraints& pc;
  std::vector<std::uint32_t> pred_mask;
  std::uint32_t full = 0;
  std::unordered_set<std::string> failed;
  std::vector<int> order;

  explicit MnsSearch(const Machine& machine)
      : m(machine), pc(machine.pc) {
    int labels = pc.n_labels();
    pred_mask.assign(static_cast<size_t>(labels), 0);
    for (int l = 0; l < labels; ++l) {
      for (int p : pc.preds[static_cast<size_t>(l)])
        pred_mask[static_cast<size_t>(l)] |= std::uint32_t{1} << p;
      full |= std::uint32_t{1} << l;
    }
  }

  bool run(MachineState& s, std::uint32_t consumed) {
    if (consumed == full) return true;
    std::string key = std::to_string(consumed) + '#' + s.key();
    if (failed.count(key)) return false;
    for (int l = 0; l < pc.n_labels(); ++l) {
      std::uint32_t bit = std::uint32_t{1} << l;
      if (consumed & bit) continue;
      if (pred_mask[static_cast<size_t>(l)] & ~consumed) continue;
      MachineState next = s;
      if (!m.step(next, l)) continue;
      order.push_back(l);
      if (run(next, consumed | bit)) return true;
      order.pop_back();
    }
    failed.insert(std::move(key));
    return false;
  }
};

}  // namespace

bool mns(const EventStructure& e, const Witness& x,
         const PathConstraints& pc, std::vector<std::string>* trace) {
  if (static_cast<int>(e.non_init_ids().size()) > kMaxEvents)
    throw std::runtime_error("event structure exceeds the 12-event guard");

  MachineState init;
  init.stamp.assign(static_cast<size_t>(e.n()), 0);
  for (int id = 0; id < e.n(); ++id) {
    const Event& evt = e.ev(id);
    if (!evt.is_init()) continue;
    init.mem[evt.loc] = id;
    for (int p = 0; p < e.n(); ++p) {
      const Event& pe = e.ev(p);
      if (!pe.is_init() && pe.proc >= 0) init.log[{pe.proc, evt.loc}] = id;
    }
  }

  Machine m(e, x, pc);
  MnsSearch search(m);
  bool ok = search.run(init, 0);
  if (ok && trace) {
    trace->clear();
    for (int l : search.order) trace->push_back(label_name(e, pc, l));
  }
  return ok;
}

bool check_lemma1(const EventStructure& e, const Witness& x) {
  return valid(e, x, Arch::SC) == mns(e, x, build_path(e, x, {}));
}

bool check_theorem1(const EventStructure& e, const Witness& x, Arch a) {
  std::vector<std::pair<int, int>> cand = delays(e, x, a);
  bool va = valid(e, x, a);
  bool vsc = valid(e, x, Arch::SC);

  // Soundness: a completing path under the full candidate set certifies
  // validity on a.
  if (mns(e, x, build_path(e, x, cand)) && !va) return false;

  // Completeness: a weak execution admits a completing path under some
  // subset of the candidates.  Forcing every candidate at once can be
  // self-contradictory (a cycle made only of po and rfe pairs reverses
  // into a cycle again), so the diversion is existential.
  if (va && !vsc) {
    if (cand.size() > 16)
      throw std::runtime_error("delay set exceeds the subset-search guard");
    std::vector<unsigned> masks;
    for (unsigned m = 0; m < (1u << cand.size()); ++m) masks.push_back(m);
    std::sort(masks.begin(), masks.end(), [](unsigned l, unsigned r) {
      int pl = __builtin_popcount(l), pr = __builtin_popcount(r);
      return pl != pr ? pl < pr : l < r;
    });
    for (unsigned m : masks) {
      std::vector<std::pair<int, int>> sub;
      for (size_t i = 0; i < cand.size(); ++i)
        if (m & (1u << i)) sub.push_back(cand[i]);
      if (mns(e, x, build_path(e, x, sub))) return true;
    }
    return false;
  }
  return true;
}

bool check_theorem2(const EventStructure& e, const Witness& x, Arch a,
                    const std::vector<std::pair<int, int>>& selection) {
  bool m = mns(e, x, build_path(e, x, selection));
  bool va = valid(e, x, a);
  bool vsc = valid(e, x, Arch::SC);
  bool forward = !(va && !vsc) || m;
  bool backward = !m || va;
  return forward && backward;
}

}  // namespace wmm
