/*
 * Copyright (c) 2026, The tsolive Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/


#include "tsolive/liveness.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <functional>
#include <unordered_set>

#include "json.hpp"

namespace tsolive {

std::string_view PropertyName(Property p) {
  switch (p) {
    case Property::kLockFreedom: return "lock-freedom";
    case Property::kWaitFreedom: return "wait-freedom";
    case Property::kDeadlockFreedom: return "deadlock-freedom";
    case Property::kStarvationFreedom: return "starvation-freedom";
    case Property::kObstructionFreedom: return "obstruction-freedom";
  }
  return "?";
}

std::optional<Property> ParseProperty(std::string_view s) {
  std::string norm;
  for (char c : s) norm += c == '_' ? '-' : static_cast<char>(std::tolower(c));
  for (Property p : kAllProperties) {
    std::string_view name = PropertyName(p);
    if (norm == name || norm == name.substr(0, name.find('-'))) return p;
  }
  return std::nullopt;
}

std::string_view VerdictName(Verdict v) {
  switch (v) {
    case Verdict::kViolated: return "VIOLATED";
    case Verdict::kNoViolationAtBound: return "NO_VIOLATION_AT_BOUND";
    case Verdict::kSatisfied: return "SATISFIED";
  }
  return "?";
}

LoopSummary Summarize(const Configuration& entry, const Trace& loop) {
  const std::size_t n = entry.procs();
  LoopSummary s;
  s.pending.assign(n, false);
  s.acts.assign(n, false);
  s.rets.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) s.pending[i] = entry.control[i] != kInClient;
  s.single_pid = !loop.empty();
  for (const Action& a : loop) {
    std::size_t i = static_cast<std::size_t>(a.pid - 1);
    if (i >= n) throw Error("loop action with pid outside 1.." + std::to_string(n));
    s.acts[i] = true;
    if (a.kind == ActionKind::kReturn) {
      s.rets[i] = true;
      s.any_return = true;
    }
    if (a.pid != loop.front().pid) s.single_pid = false;
  }
  return s;
}

bool ClauseViolated(Property p, const LoopSummary& s) {
  const std::size_t n = s.acts.size();
  bool all_act = n > 0;
  for (std::size_t q = 0; q < n; ++q) all_act = all_act && s.acts[q];
  auto some_pending = [&](auto pred) {
    for (std::size_t q = 0; q < n; ++q) {
      if (s.pending[q] && pred(q)) return true;
    }
    return false;
  };
  switch (p) {
    case Property::kLockFreedom:
      return !s.any_return && some_pending([&](std::size_t q) { return s.acts[q]; });
    case Property::kWaitFreedom:
      return some_pending([&](std::size_t q) { return s.acts[q] && !s.rets[q]; });
    case Property::kDeadlockFreedom:
      return !s.any_return && all_act;
    case Property::kStarvationFreedom:
      return all_act && some_pending([&](std::size_t q) { return !s.rets[q]; });
    case Property::kObstructionFreedom:
      return s.single_pid && !s.any_return &&
             some_pending([&](std::size_t q) { return s.acts[q]; });
  }
  return false;
}

bool CheckLassoConditions(const SystemSpec& spec, LassoWitness& w, Property p) {
  if (!LassoReplays(spec, w)) throw Error("lasso witness does not replay");
  return ClauseViolated(p, Summarize(w.entry, w.loop));
}

std::string ReportJson(const Library& lib, const ViolationReport& r) {
  nlohmann::ordered_json j;
  j["property"] = PropertyName(r.property);
  j["verdict"] = VerdictName(r.verdict);
  j["bound"] = r.bound ? nlohmann::ordered_json(*r.bound) : nlohmann::ordered_json();
  j["model"] = r.model == MemoryModel::kTso ? "tso" : "sc";
  j["procs"] = r.procs;
  auto lines = [&lib](const Trace& t) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (const Action& x : t) a.push_back(FormatAction(lib, x));
    return a;
  };
  j["stem"] = r.witness ? lines(r.witness->stem) : nlohmann::ordered_json::array();
  j["loop"] = r.witness ? lines(r.witness->loop) : nlohmann::ordered_json::array();
  if (r.witness && !r.witness->entry.control.empty()) {
    j["entry"] = FormatConfiguration(lib, r.witness->entry);
  }
  j["stats"] = {{"nodes", r.stats.nodes}, {"arcs", r.stats.arcs}, {"millis", r.stats.millis}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Graph helpers over StateGraph arcs

namespace {

using ArcFilter = std::function<bool(std::uint32_t)>;

// Iterative Tarjan over arcs passing `keep`.
std::vector<std::uint32_t> Scc(const StateGraph& g, const ArcFilter& keep) {
  const std::uint32_t n = static_cast<std::uint32_t>(g.node_count());
  constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::uint32_t> index(n, kNone), low(n, 0), comp(n, kNone);
  std::vector<char> on_stack(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> call;  // node, next arc
  std::uint32_t counter = 0, comps = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.emplace_back(root, g.first_arc[root]);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, next] = call.back();
      if (next < g.first_arc[v + 1]) {
        std::uint32_t a = next++;
        if (!keep(a)) continue;
        std::uint32_t w = g.arcs[a].dst;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, g.first_arc[w]);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      std::uint32_t done = v;
      call.pop_back();
      if (!call.empty()) {
        std::uint32_t parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = comps;
        } while (w != done);
        ++comps;
      }
    }
  }
  return comp;
}

// Shortest arc path from `src` whose last arc satisfies `goal`; every arc
// on the path passes `keep`.
std::optional<std::vector<std::uint32_t>> PathToArc(const StateGraph& g, std::uint32_t src,
                                                    const ArcFilter& keep,
                                                    const ArcFilter& goal) {
  std::unordered_map<std::uint32_t, std::int64_t> via;  // node -> arc reaching it
  std::deque<std::uint32_t> queue{src};
  via[src] = -1;
  auto unwind = [&](std::uint32_t last) {
    std::vector<std::uint32_t> path{last};
    std::uint32_t v = g.arcs[last].src;
    while (via[v] >= 0) {
      auto a = static_cast<std::uint32_t>(via[v]);
      path.push_back(a);
      v = g.arcs[a].src;
    }
    std::reverse(path.begin(), path.end());
    return path;
  };
  while (!queue.empty()) {
    std::uint32_t v = queue.front();
    queue.pop_front();
    for (std::uint32_t a = g.first_arc[v]; a < g.first_arc[v + 1]; ++a) {
      if (!keep(a)) continue;
      if (goal(a)) return unwind(a);
      std::uint32_t w = g.arcs[a].dst;
      if (!via.count(w)) {
        via[w] = a;
        queue.push_back(w);
      }
    }
  }
  return std::nullopt;
}

struct Requirement {
  ArcFilter satisfied_by;
};

// Closed walk from `v` along `keep` arcs meeting every requirement, built
// greedily from shortest paths.
std::optional<Trace> CoveringLoop(const StateGraph& g, std::uint32_t v, const ArcFilter& keep,
                                  std::vector<Requirement> reqs) {
  Trace loop;
  std::uint32_t cur = v;
  while (!reqs.empty()) {
    auto path = PathToArc(g, cur, keep, [&](std::uint32_t a) {
      return std::any_of(reqs.begin(), reqs.end(),
                         [a](const Requirement& r) { return r.satisfied_by(a); });
    });
    if (!path) return std::nullopt;
    for (std::uint32_t a : *path) {
      loop.push_back(g.arcs[a].action);
      reqs.erase(std::remove_if(reqs.begin(), reqs.end(),
                                [a](const Requirement& r) { return r.satisfied_by(a); }),
                 reqs.end());
    }
    cur = g.arcs[path->back()].dst;
  }
  if (cur != v || loop.empty()) {
    auto back = PathToArc(g, cur, keep, [&](std::uint32_t a) { return g.arcs[a].dst == v; });
    if (!back) return std::nullopt;
    for (std::uint32_t a : *back) loop.push_back(g.arcs[a].action);
  }
  return loop;
}

bool IsReturn(const Action& a) { return a.kind == ActionKind::kReturn; }

double MillisSince(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

ViolationReport BlankReport(const SystemSpec& spec, Property p) {
  ViolationReport r;
  r.property = p;
  r.model = spec.model;
  r.procs = spec.procs;
  r.bound = spec.model == MemoryModel::kTso ? spec.buffer_bound : std::nullopt;
  return r;
}

Verdict NoViolation(const SystemSpec& spec) {
  return spec.model == MemoryModel::kSc ? Verdict::kSatisfied : Verdict::kNoViolationAtBound;
}

}  // namespace

// ---------------------------------------------------------------------------

ViolationReport FindViolation(const SystemSpec& spec, const StateGraph& g, Property p) {
  ViolationReport report = BlankReport(spec, p);
  report.stats.nodes = g.node_count();
  report.stats.arcs = g.arc_count();
  const int n = spec.procs;
  const std::uint32_t all_mask = (1u << n) - 1u;
  auto bit = [](int pid) { return 1u << (pid - 1); };
  auto pending = [&](std::uint32_t v, int pid) {
    return g.nodes[v].control[pid - 1] != kInClient;
  };

  // One arc filter per "mode"; for lock/deadlock a single return-free
  // filter, otherwise one per process q.
  struct Mode {
    int q = 0;  // 0: no distinguished process
    ArcFilter keep;
    std::vector<std::uint32_t> comp;
    std::vector<std::uint32_t> acts;  // per component
  };
  std::vector<Mode> modes;
  auto add_mode = [&](int q, ArcFilter keep) {
    Mode m;
    m.q = q;
    m.keep = std::move(keep);
    m.comp = Scc(g, m.keep);
    std::uint32_t comps = 0;
    for (auto c : m.comp) comps = std::max(comps, c + 1);
    m.acts.assign(comps, 0);
    for (std::uint32_t a = 0; a < g.arc_count(); ++a) {
      const auto& arc = g.arcs[a];
      if (m.keep(a) && m.comp[arc.src] == m.comp[arc.dst]) {
        m.acts[m.comp[arc.src]] |= bit(arc.action.pid);
      }
    }
    modes.push_back(std::move(m));
  };
  switch (p) {
    case Property::kLockFreedom:
    case Property::kDeadlockFreedom:
      add_mode(0, [&g](std::uint32_t a) { return !IsReturn(g.arcs[a].action); });
      break;
    case Property::kWaitFreedom:
    case Property::kStarvationFreedom:
      for (int q = 1; q <= n; ++q) {
        add_mode(q, [&g, q](std::uint32_t a) {
          return !(IsReturn(g.arcs[a].action) && g.arcs[a].action.pid == q);
        });
      }
      break;
    case Property::kObstructionFreedom:
      for (int q = 1; q <= n; ++q) {
        add_mode(q, [&g, q](std::uint32_t a) {
          return g.arcs[a].action.pid == q && !IsReturn(g.arcs[a].action);
        });
      }
      break;
  }

  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    for (const Mode& m : modes) {
      std::uint32_t acts = m.acts[m.comp[v]];
      if (acts == 0) continue;
      std::uint32_t pend = 0;
      for (int pid = 1; pid <= n; ++pid) {
        if (pending(v, pid)) pend |= bit(pid);
      }
      std::vector<Requirement> reqs;
      auto need_pid = [&](std::uint32_t mask) {
        reqs.push_back(Requirement{[&g, mask](std::uint32_t a) {
          return ((1u << (g.arcs[a].action.pid - 1)) & mask) != 0;
        }});
      };
      bool ok = false;
      switch (p) {
        case Property::kLockFreedom:
          ok = (acts & pend) != 0;
          if (ok) need_pid(acts & pend);
          break;
        case Property::kDeadlockFreedom:
          ok = acts == all_mask;
          if (ok) {
            for (int pid = 1; pid <= n; ++pid) need_pid(bit(pid));
          }
          break;
        case Property::kWaitFreedom:
        case Property::kObstructionFreedom:
          ok = (pend & bit(m.q)) && (acts & bit(m.q));
          if (ok) need_pid(bit(m.q));
          break;
        case Property::kStarvationFreedom:
          ok = (pend & bit(m.q)) && acts == all_mask;
          if (ok) {
            for (int pid = 1; pid <= n; ++pid) need_pid(bit(pid));
          }
          break;
      }
      if (!ok) continue;
      const std::uint32_t c = m.comp[v];
      ArcFilter inside = [&g, &m, c](std::uint32_t a) {
        return m.keep(a) && m.comp[g.arcs[a].src] == c && m.comp[g.arcs[a].dst] == c;
      };
      auto loop = CoveringLoop(g, v, inside, std::move(reqs));
      if (!loop) throw Error("internal: no covering loop inside a qualifying component");
      LassoWitness w{g.PathTo(v), std::move(*loop), g.nodes[v]};
      report.verdict = Verdict::kViolated;
      report.witness = std::move(w);
      return report;
    }
  }
  report.verdict = NoViolation(spec);
  return report;
}

ViolationReport FindViolation(const SystemSpec& spec, Property p,
                              const ExploreOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  StateGraph g = Explore(spec, options);
  ViolationReport r = FindViolation(spec, g, p);
  r.stats.millis = MillisSince(t0);
  return r;
}

// ---------------------------------------------------------------------------
// Blocking pairs

namespace {

// Single-process SC graph over every (control, memory) pair, return arcs
// removed. Node id = control_index * memories + memory_index where
// control_index 0 is in_clt and 1 + q is position q.
struct ScGraph {
  const Library* lib = nullptr;
  std::size_t memories = 1;
  std::vector<std::vector<std::pair<std::uint32_t, Action>>> out;
  std::vector<char> blocking;

  std::uint32_t Encode(std::int32_t control, const std::vector<ValueId>& mem) const {
    std::size_t m = 0;
    for (std::size_t x = mem.size(); x-- > 0;) m = m * lib->domain_size() + mem[x];
    std::size_t c = control == kInClient ? 0 : static_cast<std::size_t>(control) + 1;
    return static_cast<std::uint32_t>(c * memories + m);
  }

  BlockingPair Decode(std::uint32_t id) const {
    BlockingPair bp;
    std::size_t c = id / memories, m = id % memories;
    bp.control = c == 0 ? kInClient : static_cast<std::int32_t>(c - 1);
    bp.memory.resize(lib->locations.size());
    for (auto& v : bp.memory) {
      v = static_cast<ValueId>(m % lib->domain_size());
      m /= lib->domain_size();
    }
    return bp;
  }
};

ScGraph BuildScGraph(const Library& lib, const BlockingPairOptions& options) {
  ScGraph sg;
  sg.lib = &lib;
  for (std::size_t x = 0; x < lib.locations.size(); ++x) {
    sg.memories *= lib.domain_size();
    if (sg.memories > options.max_nodes) throw Error("memory valuation space too large");
  }
  const std::size_t total = (lib.positions.size() + 1) * sg.memories;
  if (total > options.max_nodes) throw Error("single-process SC graph too large");
  std::shared_ptr<const Library> alias(&lib, [](const Library*) {});
  SystemSpec spec = MgcCompose(alias, 1, MemoryModel::kSc, std::nullopt);
  sg.out.resize(total);
  for (std::uint32_t id = 0; id < total; ++id) {
    BlockingPair bp = sg.Decode(id);
    Configuration c{{bp.control}, bp.memory, {{}}};
    for (auto& s : EnabledSc(spec, c)) {
      if (s.action.kind == ActionKind::kReturn) continue;
      sg.out[id].emplace_back(sg.Encode(s.next.control[0], s.next.memory), s.action);
    }
  }
  // Peel nodes that cannot reach a cycle.
  std::vector<std::vector<std::uint32_t>> preds(total);
  std::vector<std::size_t> live_out(total);
  std::deque<std::uint32_t> dead;
  for (std::uint32_t id = 0; id < total; ++id) {
    for (const auto& [to, a] : sg.out[id]) preds[to].push_back(id);
    live_out[id] = sg.out[id].size();
    if (live_out[id] == 0) dead.push_back(id);
  }
  sg.blocking.assign(total, 1);
  while (!dead.empty()) {
    std::uint32_t v = dead.front();
    dead.pop_front();
    sg.blocking[v] = 0;
    for (std::uint32_t u : preds[v]) {
      if (--live_out[u] == 0) dead.push_back(u);
    }
  }
  return sg;
}

}  // namespace

std::vector<BlockingPair> BlockingPairs(const Library& lib, const BlockingPairOptions& options) {
  ScGraph sg = BuildScGraph(lib, options);
  std::vector<BlockingPair> out;
  for (std::uint32_t id = 0; id < sg.blocking.size(); ++id) {
    if (sg.blocking[id]) out.push_back(sg.Decode(id));
  }
  return out;
}

ViolationReport CheckObstructionFreedom(const SystemSpec& spec, const ExploreOptions& options) {
  auto t0 = std::chrono::steady_clock::now();
  ViolationReport report = BlankReport(spec, Property::kObstructionFreedom);
  ScGraph sg = BuildScGraph(spec.lib(), {});
  if (std::none_of(sg.blocking.begin(), sg.blocking.end(), [](char b) { return b != 0; })) {
    report.verdict = Verdict::kSatisfied;
    report.stats.nodes = sg.out.size();
    report.stats.millis = MillisSince(t0);
    return report;
  }
  StateGraph g = Explore(spec, options);
  report.stats.nodes = g.node_count();
  report.stats.arcs = g.arc_count();
  for (std::uint32_t v = 0; v < g.node_count(); ++v) {
    const Configuration& c = g.nodes[v];
    if (!c.AllBuffersEmpty()) continue;
    for (int pid = 1; pid <= spec.procs; ++pid) {
      std::uint32_t start = sg.Encode(c.control[pid - 1], c.memory);
      if (!sg.blocking[start]) continue;
      // Follow blocking successors until a node repeats.
      std::vector<std::uint32_t> walk{start};
      std::vector<Action> labels;
      std::unordered_map<std::uint32_t, std::size_t> seen{{start, 0}};
      std::size_t cycle_at = 0;
      for (std::uint32_t cur = start;;) {
        auto it = std::find_if(sg.out[cur].begin(), sg.out[cur].end(),
                               [&](const auto& e) { return sg.blocking[e.first] != 0; });
        labels.push_back(it->second);
        cur = it->first;
        auto [pos, fresh] = seen.emplace(cur, walk.size());
        walk.push_back(cur);
        if (!fresh) {
          cycle_at = pos->second;
          break;
        }
      }
      auto lift = [&](std::size_t from, std::size_t to) {
        Trace t;
        for (std::size_t k = from; k < to; ++k) {
          Action a = labels[k];
          a.pid = pid;
          t.push_back(a);
          if (a.kind == ActionKind::kWrite && spec.model == MemoryModel::kTso) {
            t.push_back(Action::Flush(pid, a.loc, a.val));
          }
        }
        return t;
      };
      LassoWitness w;
      w.stem = g.PathTo(v);
      Trace prefix = lift(0, cycle_at);
      w.stem.insert(w.stem.end(), prefix.begin(), prefix.end());
      w.loop = lift(cycle_at, labels.size());
      if (!CheckLassoConditions(spec, w, Property::kObstructionFreedom)) {
        throw Error("internal: blocking-pair witness fails the obstruction clause");
      }
      report.verdict = Verdict::kViolated;
      report.witness = std::move(w);
      report.stats.millis = MillisSince(t0);
      return report;
    }
  }
  report.verdict = NoViolation(spec);
  report.stats.millis = MillisSince(t0);
  return report;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

// Kosaraju, kept separate from the Tarjan used by the checker.
std::vector<std::uint32_t> KosarajuScc(const StateGraph& g, const ArcFilter& keep) {
  const std::uint32_t n = static_cast<std::uint32_t>(g.node_count());
  std::vector<std::vector<std::uint32_t>> fwd(n), rev(n);
  for (std::uint32_t a = 0; a < g.arc_count(); ++a) {
    if (!keep(a)) continue;
    fwd[g.arcs[a].src].push_back(g.arcs[a].dst);
    rev[g.arcs[a].dst].push_back(g.arcs[a].src);
  }
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> order;
  for (std::uint32_t r = 0; r < n; ++r) {
    if (seen[r]) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> st{{r, 0}};
    seen[r] = 1;
    while (!st.empty()) {
      auto& [v, i] = st.back();
      if (i < fwd[v].size()) {
        std::uint32_t w = fwd[v][i++];
        if (!seen[w]) {
          seen[w] = 1;
          st.emplace_back(w, 0);
        }
      } else {
        order.push_back(v);
        st.pop_back();
      }
    }
  }
  constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::uint32_t> comp(n, kNone);
  std::uint32_t comps = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (comp[*it] != kNone) continue;
    std::vector<std::uint32_t> st{*it};
    comp[*it] = comps;
    while (!st.empty()) {
      std::uint32_t v = st.back();
      st.pop_back();
      for (std::uint32_t w : rev[v]) {
        if (comp[w] == kNone) {
          comp[w] = comps;
          st.push_back(w);
        }
      }
    }
    ++comps;
  }
  return comp;
}

}  // namespace

bool BruteForceOracle(const SystemSpec& spec, Property p, std::size_t max_nodes) {
  StateGraph g;
  try {
    g = Explore(spec, ExploreOptions{max_nodes});
  } catch (const BudgetExceeded&) {
    throw Error("oracle: state graph exceeds " + std::to_string(max_nodes) + " nodes");
  }
  const int n = spec.procs;
  const std::uint32_t full = (1u << n) - 1u;
  // Every loop summary class (A = pids acting, R = pids returning, R within A).
  for (std::uint32_t acts = 1; acts <= full; ++acts) {
    for (std::uint32_t rets = acts;; rets = (rets - 1) & acts) {
      ArcFilter keep = [&g, acts, rets](std::uint32_t a) {
        const Action& x = g.arcs[a].action;
        std::uint32_t b = 1u << (x.pid - 1);
        return (acts & b) && (x.kind != ActionKind::kReturn || (rets & b));
      };
      auto comp = KosarajuScc(g, keep);
      std::uint32_t comps = 0;
      for (auto c : comp) comps = std::max(comps, c + 1);
      std::vector<std::uint32_t> cacts(comps, 0), crets(comps, 0);
      for (std::uint32_t a = 0; a < g.arc_count(); ++a) {
        const auto& arc = g.arcs[a];
        if (!keep(a) || comp[arc.src] != comp[arc.dst]) continue;
        std::uint32_t b = 1u << (arc.action.pid - 1);
        cacts[comp[arc.src]] |= b;
        if (arc.action.kind == ActionKind::kReturn) crets[comp[arc.src]] |= b;
      }
      for (std::uint32_t v = 0; v < g.node_count(); ++v) {
        std::uint32_t c = comp[v];
        if (cacts[c] != acts || crets[c] != rets) continue;
        LoopSummary s;
        s.pending.assign(n, false);
        s.acts.assign(n, false);
        s.rets.assign(n, false);
        for (int q = 0; q < n; ++q) {
          s.pending[q] = g.nodes[v].control[q] != kInClient;
          s.acts[q] = (acts >> q) & 1u;
          s.rets[q] = (rets >> q) & 1u;
        }
        s.any_return = rets != 0;
        s.single_pid = (acts & (acts - 1)) == 0;
        if (!ClauseViolated(p, s)) continue;
        // Confirm on a concrete lasso.
        std::vector<Requirement> reqs;
        for (int q = 0; q < n; ++q) {
          if ((acts >> q) & 1u) {
            reqs.push_back({[&g, q](std::uint32_t a) { return g.arcs[a].action.pid == q + 1; }});
          }
          if ((rets >> q) & 1u) {
            reqs.push_back({[&g, q](std::uint32_t a) {
              return g.arcs[a].action.pid == q + 1 && IsReturn(g.arcs[a].action);
            }});
          }
        }
        ArcFilter inside = [&](std::uint32_t a) {
          return keep(a) && comp[g.arcs[a].src] == c && comp[g.arcs[a].dst] == c;
        };
        auto loop = CoveringLoop(g, v, inside, std::move(reqs));
        if (!loop) throw Error("oracle: component without a covering walk");
        LassoWitness w{g.PathTo(v), std::move(*loop), g.nodes[v]};
        if (!CheckLassoConditions(spec, w, p)) {
          throw Error("oracle: summary class and concrete lasso disagree");
        }
        return true;
      }
      if (rets == 0) break;
    }
  }
  return false;
}

}  // namespace tsolive
