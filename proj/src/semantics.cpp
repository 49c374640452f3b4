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


#include "tsolive/semantics.hpp"

#include <algorithm>
#include <deque>
#include <ostream>
#include <tuple>

namespace tsolive {

ValueId Lookup(const Configuration& c, int pid, LocId x) {
  for (const BufferEntry& e : c.buffers[pid - 1]) {
    if (e.loc == x) return e.val;
  }
  return c.memory[x];
}

namespace {

// Rule rank used for ordering; cas_suc sorts before cas_fail.
int RuleRank(const Action& a, bool cas_success) {
  switch (a.kind) {
    case ActionKind::kTau: return 0;
    case ActionKind::kRead: return 1;
    case ActionKind::kWrite: return 2;
    case ActionKind::kCas: return cas_success ? 3 : 4;
    case ActionKind::kFlush: return 5;
    case ActionKind::kCall: return 6;
    case ActionKind::kReturn: return 7;
  }
  return 8;
}

void AddProcessSteps(const SystemSpec& spec, const Configuration& c, int pid,
                     bool tso, std::vector<StepResult>& out) {
  const Library& lib = spec.lib();
  const std::size_t i = static_cast<std::size_t>(pid - 1);
  const auto& buffer = c.buffers[i];
  struct Ranked {
    int rank;
    StepResult step;
  };
  std::vector<Ranked> local;
  auto emit = [&](const Action& a, Configuration next, bool cas_success = false) {
    local.push_back(Ranked{RuleRank(a, cas_success), StepResult{a, std::move(next)}});
  };

  const std::int32_t control = c.control[i];
  if (control == kInClient) {
    for (MethodId m = 0; m < lib.methods.size(); ++m) {
      for (ValueId a = 0; a < lib.domain_size(); ++a) {
        Configuration next = c;
        next.control[i] = static_cast<std::int32_t>(lib.methods[m].initial[a]);
        emit(Action::Call(pid, m, a), std::move(next));
      }
    }
  } else {
    const PosId q = static_cast<PosId>(control);
    const Position& pos = lib.positions[q];
    if (pos.final_for) {
      Configuration next = c;
      next.control[i] = kInClient;
      emit(Action::Return(pid, pos.method, *pos.final_for), std::move(next));
    }
    // Out edges are sorted by command, so reads of one location are adjacent.
    std::optional<LocId> looked_up;
    ValueId current = 0;
    for (std::uint32_t ei : lib.out(q)) {
      const Edge& e = lib.edges[ei];
      const Command& cmd = e.cmd;
      auto moved = [&] {
        Configuration next = c;
        next.control[i] = static_cast<std::int32_t>(e.to);
        return next;
      };
      switch (cmd.kind) {
        case CommandKind::kTau:
          emit(Action::Tau(pid), moved());
          break;
        case CommandKind::kRead: {
          if (looked_up != cmd.loc) {
            looked_up = cmd.loc;
            current = Lookup(c, pid, cmd.loc);
          }
          const ValueId v = current;
          bool fires = cmd.any_value ? !lib.HasExplicitRead(q, cmd.loc, v) : v == cmd.a;
          if (fires) emit(Action::Read(pid, cmd.loc, v), moved());
          break;
        }
        case CommandKind::kWrite: {
          if (!tso) {
            Configuration next = moved();
            next.memory[cmd.loc] = cmd.a;
            emit(Action::Write(pid, cmd.loc, cmd.a), std::move(next));
            break;
          }
          if (spec.buffer_bound &&
              buffer.size() >= static_cast<std::size_t>(*spec.buffer_bound)) {
            break;
          }
          Configuration next = moved();
          auto& buf = next.buffers[i];
          buf.insert(buf.begin(), BufferEntry{cmd.loc, cmd.a});
          emit(Action::Write(pid, cmd.loc, cmd.a), std::move(next));
          break;
        }
        case CommandKind::kCasSuc:
          if (buffer.empty() && c.memory[cmd.loc] == cmd.a) {
            Configuration next = moved();
            next.memory[cmd.loc] = cmd.b;
            emit(Action::Cas(pid, cmd.loc, cmd.a, cmd.b), std::move(next), true);
          }
          break;
        case CommandKind::kCasFail:
          if (buffer.empty() && c.memory[cmd.loc] != cmd.a) {
            emit(Action::Cas(pid, cmd.loc, cmd.a, cmd.b), moved());
          }
          break;
      }
    }
  }
  if (tso && !buffer.empty()) {
    Configuration next = c;
    BufferEntry oldest = next.buffers[i].back();
    next.buffers[i].pop_back();
    next.memory[oldest.loc] = oldest.val;
    emit(Action::Flush(pid, oldest.loc, oldest.val), std::move(next));
  }

  std::stable_sort(local.begin(), local.end(), [](const Ranked& x, const Ranked& y) {
    const Action& a = x.step.action;
    const Action& b = y.step.action;
    return std::tie(x.rank, a.loc, a.method, a.val, a.val2) <
           std::tie(y.rank, b.loc, b.method, b.val, b.val2);
  });
  for (auto& r : local) out.push_back(std::move(r.step));
}

}  // namespace

std::vector<StepResult> EnabledTso(const SystemSpec& spec, const Configuration& c) {
  std::vector<StepResult> out;
  for (int pid = 1; pid <= static_cast<int>(c.procs()); ++pid) {
    AddProcessSteps(spec, c, pid, true, out);
  }
  return out;
}

std::vector<StepResult> EnabledSc(const SystemSpec& spec, const Configuration& c) {
  if (!c.AllBuffersEmpty()) {
    throw Error("SC stepping requires empty store buffers");
  }
  std::vector<StepResult> out;
  for (int pid = 1; pid <= static_cast<int>(c.procs()); ++pid) {
    AddProcessSteps(spec, c, pid, false, out);
  }
  return out;
}

std::vector<StepResult> Enabled(const SystemSpec& spec, const Configuration& c) {
  return spec.model == MemoryModel::kTso ? EnabledTso(spec, c) : EnabledSc(spec, c);
}

std::vector<Configuration> Successors(const SystemSpec& spec, const Configuration& c,
                                      const Action& a) {
  std::vector<Configuration> out;
  if (a.pid < 1 || a.pid > static_cast<int>(c.procs())) return out;
  std::vector<StepResult> steps;
  AddProcessSteps(spec, c, a.pid, spec.model == MemoryModel::kTso, steps);
  for (auto& s : steps) {
    if (s.action == a) out.push_back(std::move(s.next));
  }
  return out;
}

std::optional<Configuration> Step(const SystemSpec& spec, const Configuration& c,
                                  const Action& a) {
  auto succ = Successors(spec, c, a);
  if (succ.empty()) return std::nullopt;
  return std::move(succ.front());
}

std::vector<Configuration> ReplayAll(const SystemSpec& spec, const Trace& t,
                                     const std::vector<Configuration>& from) {
  std::vector<Configuration> current = from;
  for (std::size_t k = 0; k < t.size(); ++k) {
    std::vector<Configuration> next;
    std::unordered_map<Configuration, bool, ConfigurationHash> seen;
    for (const auto& c : current) {
      for (auto& s : Successors(spec, c, t[k])) {
        if (seen.emplace(s, true).second) next.push_back(std::move(s));
      }
    }
    if (next.empty()) {
      std::vector<Action> enabled;
      Configuration at = current.empty() ? Configuration{} : current.front();
      if (!current.empty()) {
        for (const auto& s : Enabled(spec, at)) enabled.push_back(s.action);
      }
      throw ReplayError(k + 1, at, std::move(enabled),
                        "action " + std::to_string(k + 1) + " (" +
                            FormatAction(spec.lib(), t[k]) + ") is not enabled at " +
                            FormatConfiguration(spec.lib(), at));
    }
    current = std::move(next);
  }
  return current;
}

Configuration Replay(const SystemSpec& spec, const Trace& t, const Configuration& from) {
  return ReplayAll(spec, t, {from}).front();
}

bool LassoReplays(const SystemSpec& spec, LassoWitness& w) {
  if (w.loop.empty()) return false;
  std::vector<Configuration> ends;
  try {
    ends = ReplayAll(spec, w.stem, {InitialConfiguration(spec)});
  } catch (const ReplayError&) {
    return false;
  }
  auto closes = [&](const Configuration& entry) {
    try {
      auto back = ReplayAll(spec, w.loop, {entry});
      return std::find(back.begin(), back.end(), entry) != back.end();
    } catch (const ReplayError&) {
      return false;
    }
  };
  if (!w.entry.control.empty()) {
    return std::find(ends.begin(), ends.end(), w.entry) != ends.end() && closes(w.entry);
  }
  for (const auto& e : ends) {
    if (closes(e)) {
      w.entry = e;
      return true;
    }
  }
  return false;
}

Trace EmbedScInTso(const Trace& sc_trace) {
  Trace out;
  out.reserve(sc_trace.size() * 2);
  for (const Action& a : sc_trace) {
    out.push_back(a);
    if (a.kind == ActionKind::kWrite) out.push_back(Action::Flush(a.pid, a.loc, a.val));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<std::uint32_t> StateGraph::Find(const Configuration& c) const {
  auto it = index.find(c);
  if (it == index.end()) return std::nullopt;
  return it->second;
}

Trace StateGraph::PathTo(std::uint32_t n) const {
  Trace t;
  while (parent_arc[n] >= 0) {
    const Arc& a = arcs[static_cast<std::size_t>(parent_arc[n])];
    t.push_back(a.action);
    n = a.src;
  }
  std::reverse(t.begin(), t.end());
  return t;
}

StateGraph Explore(const SystemSpec& spec, const ExploreOptions& options) {
  if (spec.model == MemoryModel::kTso && !spec.buffer_bound) {
    throw Error("exhaustive TSO exploration needs a buffer bound");
  }
  StateGraph g;
  auto add = [&](Configuration c, std::int64_t parent, std::uint32_t depth) {
    auto [it, fresh] = g.index.emplace(c, static_cast<std::uint32_t>(g.nodes.size()));
    if (fresh) {
      g.nodes.push_back(std::move(c));
      g.parent_arc.push_back(parent);
      g.depth.push_back(depth);
    }
    return it->second;
  };
  add(InitialConfiguration(spec), -1, 0);
  for (std::uint32_t n = 0; n < g.nodes.size(); ++n) {
    if (g.nodes.size() > options.node_budget) {
      std::vector<Configuration> frontier(g.nodes.begin() + n, g.nodes.end());
      throw BudgetExceeded(options.node_budget, std::move(frontier));
    }
    g.first_arc.push_back(static_cast<std::uint32_t>(g.arcs.size()));
    auto steps = Enabled(spec, g.nodes[n]);
    for (auto& s : steps) {
      std::uint32_t dst = add(std::move(s.next), static_cast<std::int64_t>(g.arcs.size()),
                              g.depth[n] + 1);
      g.arcs.push_back(StateGraph::Arc{n, dst, s.action});
    }
  }
  g.first_arc.push_back(static_cast<std::uint32_t>(g.arcs.size()));
  return g;
}

void WriteGraph(const Library& lib, const StateGraph& g, std::ostream& arcs,
                std::ostream& nodes) {
  std::vector<std::string> digest;
  digest.reserve(g.nodes.size());
  for (const auto& c : g.nodes) {
    digest.push_back(ConfigurationDigest(lib, c));
    nodes << digest.back() << ' ' << FormatConfiguration(lib, c) << '\n';
  }
  for (const auto& a : g.arcs) {
    arcs << digest[a.src] << ' ' << FormatAction(lib, a.action) << ' ' << digest[a.dst]
         << '\n';
  }
}

}  // namespace tsolive
