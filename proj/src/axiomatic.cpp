#include "wmm/axiomatic.hpp"

#include <algorithm>
#include <stdexcept>

namespace wmm {

std::vector<std::pair<int, int>> EventStructure::po_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int a = 0; a < n(); ++a)
    for (int b = 0; b < n(); ++b)
      if (a != b && is_po(a, b)) out.push_back({a, b});
  return out;
}

std::vector<int> EventStructure::non_init_ids() const {
  std::vector<int> out;
  for (const auto& e : events)
    if (!e.is_init()) out.push_back(e.id);
  return out;
}

bool Witness::ws_before(const Loc& loc, int w1, int w2) const {
  auto it = ws.find(loc);
  if (it == ws.end()) return false;
  const auto& order = it->second;
  auto p1 = std::find(order.begin(), order.end(), w1);
  auto p2 = std::find(order.begin(), order.end(), w2);
  return p1 != order.end() && p2 != order.end() && p1 < p2;
}

Value read_value(const EventStructure& e, const Witness& x, int read_id) {
  int w = x.rf[static_cast<size_t>(read_id)];
  return e.ev(w).value;
}

std::vector<std::pair<int, int>> ws_pairs(const Witness& x) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [loc, order] : x.ws)
    for (size_t i = 0; i < order.size(); ++i)
      for (size_t j = i + 1; j < order.size(); ++j)
        out.push_back({order[i], order[j]});
  return out;
}

std::vector<std::pair<int, int>> derive_fr(const EventStructure& e,
                                           const Witness& x) {
  std::vector<std::pair<int, int>> out;
  for (const auto& ev : e.events) {
    if (!ev.is_read()) continue;
    int src = x.rf[static_cast<size_t>(ev.id)];
    auto it = x.ws.find(ev.loc);
    if (it == x.ws.end()) continue;
    const auto& order = it->second;
    auto p = std::find(order.begin(), order.end(), src);
    for (auto q = std::next(p); q != order.end(); ++q)
      out.push_back({ev.id, *q});
  }
  return out;
}

bool acyclic(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(static_cast<size_t>(n));
  for (auto& [a, b] : edges) adj[static_cast<size_t>(a)].push_back(b);
  // 0 unvisited, 1 on stack, 2 done.
  std::vector<int> state(static_cast<size_t>(n), 0);
  std::vector<std::pair<int, size_t>> stack;
  for (int root = 0; root < n; ++root) {
    if (state[static_cast<size_t>(root)] != 0) continue;
    stack.push_back({root, 0});
    state[static_cast<size_t>(root)] = 1;
    while (!stack.empty()) {
      auto& [node, idx] = stack.back();
      auto& next = adj[static_cast<size_t>(node)];
      if (idx == next.size()) {
        state[static_cast<size_t>(node)] = 2;
        stack.pop_back();
        continue;
      }
      int child = next[idx++];
      if (state[static_cast<size_t>(child)] == 1) return false;
      if (state[static_cast<size_t>(child)] == 0) {
        state[static_cast<size_t>(child)] = 1;
        stack.push_back({child, 0});
      }
    }
  }
  return true;
}

bool acyclic_naive(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<bool>> reach(
      static_cast<size_t>(n), std::vector<bool>(static_cast<size_t>(n)));
  for (auto& [a, b] : edges) reach[static_cast<size_t>(a)][static_cast<size_t>(b)] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[static_cast<size_t>(i)][static_cast<size_t>(k)] &&
            reach[static_cast<size_t>(k)][static_cast<size_t>(j)])
          reach[static_cast<size_t>(i)][static_cast<size_t>(j)] = true;
  for (int i = 0; i < n; ++i)
    if (reach[static_cast<size_t>(i)][static_cast<size_t>(i)]) return false;
  return true;
}

bool is_rfi(const EventStructure& e, int w, int r) {
  const Event& we = e.ev(w);
  return !we.is_init() && we.proc == e.ev(r).proc;
}

bool is_rfe(const EventStructure& e, int w, int r) {
  const Event& we = e.ev(w);
  return !we.is_init() && we.proc != e.ev(r).proc;
}

namespace {

std::vector<std::pair<int, int>> rf_pairs(const EventStructure& e,
                                          const Witness& x) {
  std::vector<std::pair<int, int>> out;
  for (const auto& ev : e.events)
    if (ev.is_read()) out.push_back({x.rf[static_cast<size_t>(ev.id)], ev.id});
  return out;
}

}  // namespace

bool check_uniproc(const EventStructure& e, const Witness& x) {
  std::vector<std::pair<int, int>> edges = ws_pairs(x);
  for (auto& p : rf_pairs(e, x)) edges.push_back(p);
  for (auto& p : derive_fr(e, x)) edges.push_back(p);
  for (auto& [a, b] : e.po_pairs())
    if (e.ev(a).loc == e.ev(b).loc) edges.push_back({a, b});
  return acyclic(e.n(), edges);
}

bool check_thin(const EventStructure& e, const Witness& x) {
  std::vector<std::pair<int, int>> edges = rf_pairs(e, x);
  for (auto& p : e.dp) edges.push_back(p);
  return acyclic(e.n(), edges);
}

std::vector<std::pair<int, int>> consensus_edges(const EventStructure& e,
                                                 const Witness& x, Arch a) {
  std::vector<std::pair<int, int>> edges = ws_pairs(x);
  for (auto& p : derive_fr(e, x)) edges.push_back(p);
  for (auto& [w, r] : rf_pairs(e, x)) {
    if (e.ev(w).is_init())
      edges.push_back({w, r});  // initial writes precede everything
    else if (is_rfi(e, w, r) ? rfi_safe(a) : rfe_safe(a))
      edges.push_back({w, r});
  }
  for (auto& [e1, e2] : e.po_pairs()) {
    PairKind kind = pair_kind(e.ev(e1).is_write, e.ev(e2).is_write);
    if (safe_po(a, kind, e.is_dp(e1, e2), e.ev(e1).loc == e.ev(e2).loc,
                e.fence_between(e1, e2)))
      edges.push_back({e1, e2});
  }
  // Cumulativity: an external read tied to a fence extends safety across
  // the read-from edge.  A-cumulative: (w, e2) for rfe(w, r), fence(r, e2).
  // B-cumulative: (e1, r) for fence(e1, w), rfe(w, r).
  for (auto& [w, r] : rf_pairs(e, x)) {
    if (!is_rfe(e, w, r)) continue;
    for (int e2 : e.non_init_ids())
      if (e.is_po(r, e2) && fence_cumulative(e.fence_between(r, e2)))
        edges.push_back({w, e2});
    for (int e1 : e.non_init_ids())
      if (e.is_po(e1, w) && fence_cumulative(e.fence_between(e1, w)))
        edges.push_back({e1, r});
  }
  return edges;
}

bool check_consensus(const EventStructure& e, const Witness& x, Arch a) {
  return acyclic(e.n(), consensus_edges(e, x, a));
}

bool valid(const EventStructure& e, const Witness& x, Arch a) {
  return check_uniproc(e, x) && check_thin(e, x) && check_consensus(e, x, a);
}

std::vector<std::pair<int, int>> delays(const EventStructure& e,
                                        const Witness& x, Arch a) {
  std::vector<std::pair<int, int>> out;
  for (auto& [e1, e2] : e.po_pairs()) {
    PairKind kind = pair_kind(e.ev(e1).is_write, e.ev(e2).is_write);
    if (!safe_po(a, kind, e.is_dp(e1, e2), e.ev(e1).loc == e.ev(e2).loc,
                 e.fence_between(e1, e2)))
      out.push_back({e1, e2});
  }
  if (!rfe_safe(a))
    for (const auto& ev : e.events)
      if (ev.is_read()) {
        int w = x.rf[static_cast<size_t>(ev.id)];
        if (is_rfe(e, w, ev.id)) out.push_back({w, ev.id});
      }
  return out;
}

std::vector<Witness> enumerate_witnesses(const EventStructure& e,
                                         int max_events) {
  if (e.n() > max_events)
    throw std::runtime_error(
        "witness enumeration refused: event structure has " +
        std::to_string(e.n()) + " events, guard is " +
        std::to_string(max_events));

  // Group writes and reads per location.
  std::map<Loc, std::vector<int>> writes;  // non-init writes
  std::map<Loc, int> init_of;
  std::vector<int> reads;
  for (const auto& ev : e.events) {
    if (ev.is_write) {
      if (ev.is_init())
        init_of[ev.loc] = ev.id;
      else
        writes[ev.loc].push_back(ev.id);
    } else {
      reads.push_back(ev.id);
    }
  }

  // All per-location ws orders: permutations of non-init writes, prefixed
  // by the initial write.
  std::vector<std::map<Loc, std::vector<int>>> ws_choices{{}};
  for (auto& [loc, ws] : writes) {
    std::vector<int> perm = ws;
    std::sort(perm.begin(), perm.end());
    std::vector<std::vector<int>> orders;
    do {
      orders.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<std::map<Loc, std::vector<int>>> next;
    for (const auto& partial : ws_choices)
      for (const auto& order : orders) {
        auto m = partial;
        m[loc] = order;
        next.push_back(std::move(m));
      }
    ws_choices = std::move(next);
  }
  for (auto& m : ws_choices)
    for (auto& [loc, init] : init_of) {
      auto& order = m[loc];
      order.insert(order.begin(), init);
    }

  // All rf choices: every same-location write whose value matches the
  // read's pinned value (or any write if unvalued).
  std::vector<Witness> out;
  for (auto& wsm : ws_choices) {
    std::vector<std::vector<int>> cands;
    for (int r : reads) {
      std::vector<int> c;
      const Event& re = e.ev(r);
      for (const auto& wev : e.events)
        if (wev.is_write && wev.loc == re.loc &&
            (re.value == kUnvalued || wev.value == re.value))
          c.push_back(wev.id);
      if (c.empty()) break;
      cands.push_back(std::move(c));
    }
    if (cands.size() != reads.size()) continue;
    std::vector<size_t> pick(reads.size(), 0);
    while (true) {
      Witness x;
      x.ws = wsm;
      x.rf.assign(static_cast<size_t>(e.n()), -1);
      for (size_t i = 0; i < reads.size(); ++i)
        x.rf[static_cast<size_t>(reads[i])] = cands[i][pick[i]];
      out.push_back(std::move(x));
      size_t k = 0;
      while (k < pick.size() && ++pick[k] == cands[k].size()) {
        pick[k] = 0;
        ++k;
      }
      if (k == pick.size()) break;
    }
  }
  return out;
}

}  // namespace wmm
