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


#include "tsolive/lcm.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace tsolive {

bool IsSubword(const Word& small, const Word& big) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < big.size() && i < small.size(); ++j) {
    if (big[j] == small[i]) ++i;
  }
  return i == small.size();
}

bool IsSubword(std::string_view small, std::string_view big) {
  std::size_t i = 0;
  for (std::size_t j = 0; j < big.size() && i < small.size(); ++j) {
    if (big[j] == small[i]) ++i;
  }
  return i == small.size();
}

// ---------------------------------------------------------------------------
// ChannelMachine

namespace {

std::optional<std::uint32_t> Find(const std::vector<std::string>& names,
                                  std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - names.begin());
}

std::uint32_t Intern(std::vector<std::string>& names, const std::string& name) {
  if (auto id = Find(names, name)) return *id;
  names.push_back(name);
  return static_cast<std::uint32_t>(names.size() - 1);
}

}  // namespace

std::uint32_t ChannelMachine::AddState(const std::string& name) {
  if (auto id = FindState(name)) return *id;
  states.push_back(name);
  auto id = static_cast<std::uint32_t>(states.size() - 1);
  state_index_.emplace(name, id);
  if (out_.size() < states.size()) out_.resize(states.size());
  return id;
}

std::uint32_t ChannelMachine::AddChannel(const std::string& name) {
  return Intern(channels, name);
}

std::uint32_t ChannelMachine::AddSymbol(const std::string& name) {
  return Intern(alphabet, name);
}

std::uint32_t ChannelMachine::Add(std::uint32_t from, std::string label,
                                  std::vector<ChannelOp> ops, std::uint32_t to) {
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      if (ops[i].channel == ops[j].channel) throw Error("two operations on one channel");
    }
  }
  auto id = static_cast<std::uint32_t>(transitions.size());
  transitions.push_back(CmTransition{from, std::move(label), std::move(ops), to});
  if (out_.size() < states.size()) out_.resize(states.size());
  out_[from].push_back(id);
  return id;
}

std::optional<std::uint32_t> ChannelMachine::FindState(std::string_view name) const {
  if (state_index_.size() != states.size()) return Find(states, name);
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}
std::optional<std::uint32_t> ChannelMachine::FindChannel(std::string_view name) const {
  return Find(channels, name);
}
std::optional<std::uint32_t> ChannelMachine::FindSymbol(std::string_view name) const {
  return Find(alphabet, name);
}
std::uint32_t ChannelMachine::StateOrThrow(std::string_view name) const {
  if (auto s = FindState(name)) return *s;
  throw Error("unknown state '" + std::string(name) + "'");
}

ChannelMachine ParseChannelMachine(std::string_view text) {
  static const std::regex kArrow(R"(^(\S+)\s+--\s*([A-Za-z0-9_]*)\s*\[([^\]]*)\]\s*-->\s*(\S+)$)");
  static const std::regex kOp(R"(^([A-Za-z0-9_]+)([!?])([A-Za-z0-9_]+)$)");
  ChannelMachine cm;
  std::optional<std::string> init;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  auto words = [](std::string s) {
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream ws(s);
    std::vector<std::string> out;
    for (std::string w; ws >> w;) out.push_back(w);
    return out;
  };
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    auto colon = line.find(':');
    std::string head = colon == std::string::npos ? "" : trim(line.substr(0, colon));
    if (head == "states" || head == "channels" || head == "alphabet" || head == "init") {
      auto items = words(line.substr(colon + 1));
      if (head == "init") {
        if (items.size() != 1) throw ParseError(line_no, 1, "init names exactly one state");
        init = items[0];
      }
      for (const auto& w : items) {
        if (head == "states" || head == "init") cm.AddState(w);
        if (head == "channels") cm.AddChannel(w);
        if (head == "alphabet") cm.AddSymbol(w);
      }
      continue;
    }
    std::smatch m;
    if (!std::regex_match(line, m, kArrow)) {
      throw ParseError(line_no, 1, "expected `q --label [ops]--> q'`");
    }
    auto from = cm.FindState(m[1].str());
    auto to = cm.FindState(m[4].str());
    if (!from || !to) throw ParseError(line_no, 1, "undeclared state");
    std::vector<ChannelOp> ops;
    std::istringstream os(m[3].str());
    for (std::string item; std::getline(os, item, ';');) {
      item = trim(item);
      if (item.empty() || item == "nop") continue;
      std::smatch om;
      if (!std::regex_match(item, om, kOp)) {
        throw ParseError(line_no, 1, "bad channel operation '" + item + "'");
      }
      auto ch = cm.FindChannel(om[1].str());
      auto sym = cm.FindSymbol(om[3].str());
      if (!ch) throw ParseError(line_no, 1, "undeclared channel '" + om[1].str() + "'");
      if (!sym) throw ParseError(line_no, 1, "undeclared symbol '" + om[3].str() + "'");
      ops.push_back(ChannelOp{om[2].str() == "!" ? ChannelOp::kSend : ChannelOp::kReceive,
                              *ch, *sym});
    }
    try {
      cm.Add(*from, m[2].str(), std::move(ops), *to);
    } catch (const Error& e) {
      throw ParseError(line_no, 1, e.what());
    }
  }
  if (cm.states.empty()) throw ParseError(line_no, 1, "no states declared");
  cm.init = init ? *cm.FindState(*init) : 0;
  return cm;
}

std::string FormatChannelMachine(const ChannelMachine& cm) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += " " + x;
    return s;
  };
  std::string out = "states:" + join(cm.states) + "\nchannels:" + join(cm.channels) +
                    "\nalphabet:" + join(cm.alphabet) + "\ninit: " + cm.states[cm.init] + "\n";
  for (const auto& t : cm.transitions) {
    out += cm.states[t.from] + " --" + t.label + (t.label.empty() ? "" : " ") + "[";
    if (t.ops.empty()) out += "nop";
    for (std::size_t i = 0; i < t.ops.size(); ++i) {
      const auto& op = t.ops[i];
      out += (i ? "; " : "") + cm.channels[op.channel] +
             (op.kind == ChannelOp::kSend ? "!" : "?") + cm.alphabet[op.symbol];
    }
    out += "]--> " + cm.states[t.to] + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configurations and steps

std::size_t CmConfigHash::operator()(const CmConfig& c) const {
  std::uint64_t h = 1469598103934665603ull ^ c.state;
  for (const auto& w : c.channels) {
    h = (h ^ (0xabcdefull + w.size())) * 1099511628211ull;
    for (auto s : w) h = (h ^ s) * 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

CmConfig InitialCmConfig(const ChannelMachine& cm) {
  return CmConfig{cm.init, std::vector<Word>(cm.channels.size())};
}

std::string FormatCmConfig(const ChannelMachine& cm, const CmConfig& c) {
  std::string out = "(" + cm.states[c.state];
  for (std::size_t ch = 0; ch < c.channels.size(); ++ch) {
    out += ", " + cm.channels[ch] + "=\"";
    for (std::size_t i = 0; i < c.channels[ch].size(); ++i) {
      out += (i ? " " : "") + cm.alphabet[c.channels[ch][i]];
    }
    out += "\"";
  }
  return out + ")";
}

namespace {

// Applies `t` exactly; nullopt when a receive does not match.
std::optional<CmConfig> Apply(const CmTransition& t, const CmConfig& c) {
  if (c.state != t.from) return std::nullopt;
  CmConfig next = c;
  next.state = t.to;
  for (const auto& op : t.ops) {
    Word& w = next.channels[op.channel];
    if (op.kind == ChannelOp::kSend) {
      w.insert(w.begin(), op.symbol);
    } else {
      if (w.empty() || w.back() != op.symbol) return std::nullopt;
      w.pop_back();
    }
  }
  return next;
}

// Every subword of `w` (as a set).
std::vector<Word> Subwords(const Word& w) {
  std::vector<Word> out;
  const std::size_t n = w.size();
  if (n > 20) throw Error("word too long for subword enumeration");
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Word s;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) s.push_back(w[i]);
    }
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Cartesian product of per-channel choices.
std::vector<CmConfig> AllLosses(const CmConfig& c) {
  std::vector<CmConfig> out{CmConfig{c.state, {}}};
  for (const auto& w : c.channels) {
    std::vector<CmConfig> grown;
    for (const auto& sub : Subwords(w)) {
      for (const auto& partial : out) {
        CmConfig g = partial;
        g.channels.push_back(sub);
        grown.push_back(std::move(g));
      }
    }
    out = std::move(grown);
  }
  return out;
}

void PushUnique(std::vector<CmStep>& out, std::uint32_t t, CmConfig next) {
  for (const auto& s : out) {
    if (s.transition == t && s.next == next) return;
  }
  out.push_back(CmStep{t, std::move(next)});
}

}  // namespace

std::vector<CmStep> StepPerfect(const ChannelMachine& cm, const CmConfig& c) {
  std::vector<CmStep> out;
  for (std::uint32_t t : cm.out(c.state)) {
    if (auto next = Apply(cm.transitions[t], c)) out.push_back(CmStep{t, std::move(*next)});
  }
  return out;
}

std::vector<CmStep> StepLossy(const ChannelMachine& cm, const CmConfig& c) {
  std::vector<CmStep> out;
  const std::size_t nch = c.channels.size();
  for (std::uint32_t t : cm.out(c.state)) {
    const CmTransition& tr = cm.transitions[t];
    // Before each receive c?a, lose what lies right of the rightmost a.
    CmConfig cut = c;
    bool enabled = true;
    for (const auto& op : tr.ops) {
      if (op.kind != ChannelOp::kReceive) continue;
      Word& w = cut.channels[op.channel];
      auto it = std::find(w.rbegin(), w.rend(), op.symbol);
      if (it == w.rend()) {
        enabled = false;
        break;
      }
      w.resize(static_cast<std::size_t>(w.rend() - it));
    }
    if (!enabled) continue;
    std::vector<CmConfig> candidates{std::move(cut)};
    for (const auto& cand : candidates) {
      auto stepped = Apply(tr, cand);
      if (!stepped) continue;
      // Optionally empty any subset of channels afterwards.
      for (std::uint32_t mask = 0; mask < (1u << nch); ++mask) {
        CmConfig v = *stepped;
        bool redundant = false;
        for (std::size_t ch = 0; ch < nch; ++ch) {
          if (!((mask >> ch) & 1u)) continue;
          redundant = redundant || v.channels[ch].empty();
          v.channels[ch].clear();
        }
        if (!redundant) PushUnique(out, t, std::move(v));
      }
    }
  }
  return out;
}

std::vector<CmStep> StepLossyAll(const ChannelMachine& cm, const CmConfig& c) {
  std::vector<CmStep> out;
  for (const auto& lost : AllLosses(c)) {
    for (auto& s : StepPerfect(cm, lost)) {
      for (auto& again : AllLosses(s.next)) PushUnique(out, s.transition, std::move(again));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backward reachability

namespace {

bool Dominates(const std::vector<Word>& small, const std::vector<Word>& big) {
  for (std::size_t ch = 0; ch < small.size(); ++ch) {
    if (!IsSubword(small[ch], big[ch])) return false;
  }
  return true;
}

}  // namespace

bool BackwardReach(const ChannelMachine& cm, std::uint32_t q_init, std::uint32_t q_target,
                   BackwardStats* stats) {
  const std::size_t nch = cm.channels.size();
  // Minimal elements per state; the upward closure is the set of
  // configurations known to reach the target.
  std::vector<std::vector<std::vector<Word>>> minimal(cm.states.size());
  std::deque<std::pair<std::uint32_t, std::vector<Word>>> work;
  std::vector<std::vector<std::uint32_t>> incoming(cm.states.size());
  for (std::uint32_t t = 0; t < cm.transitions.size(); ++t) {
    incoming[cm.transitions[t].to].push_back(t);
  }
  auto insert = [&](std::uint32_t q, std::vector<Word> w) {
    auto& set = minimal[q];
    for (const auto& e : set) {
      if (Dominates(e, w)) return false;
    }
    set.erase(std::remove_if(set.begin(), set.end(),
                             [&](const std::vector<Word>& e) { return Dominates(w, e); }),
              set.end());
    set.push_back(w);
    work.emplace_back(q, std::move(w));
    return true;
  };
  auto covers_init = [&] {
    for (const auto& e : minimal[q_init]) {
      bool empty = std::all_of(e.begin(), e.end(), [](const Word& w) { return w.empty(); });
      if (empty) return true;
    }
    return false;
  };
  insert(q_target, std::vector<Word>(nch));
  std::size_t iterations = 0;
  bool reached = covers_init();
  while (!work.empty() && !reached) {
    auto [q, w] = std::move(work.front());
    work.pop_front();
    // Skip elements that were subsumed after being queued.
    if (std::find(minimal[q].begin(), minimal[q].end(), w) == minimal[q].end()) continue;
    ++iterations;
    for (std::uint32_t t : incoming[q]) {
      const CmTransition& tr = cm.transitions[t];
      std::vector<Word> pre = w;
      for (const auto& op : tr.ops) {
        Word& ch = pre[op.channel];
        if (op.kind == ChannelOp::kSend) {
          if (!ch.empty() && ch.front() == op.symbol) ch.erase(ch.begin());
        } else {
          ch.push_back(op.symbol);
        }
      }
      insert(tr.from, std::move(pre));
    }
    reached = covers_init();
  }
  if (stats) {
    stats->iterations = iterations;
    stats->minimal_elements = 0;
    for (const auto& s : minimal) stats->minimal_elements += s.size();
  }
  return reached;
}

ForwardResult ForwardReachBounded(const ChannelMachine& cm, std::uint32_t q_init,
                                  std::uint32_t q_target, std::size_t channel_bound) {
  ForwardResult r;
  r.complete = true;
  CmConfig start{q_init, std::vector<Word>(cm.channels.size())};
  std::unordered_map<CmConfig, bool, CmConfigHash> seen{{start, true}};
  std::deque<CmConfig> queue{start};
  while (!queue.empty()) {
    CmConfig c = std::move(queue.front());
    queue.pop_front();
    ++r.explored;
    if (c.state == q_target) {
      r.found = true;
      return r;
    }
    for (auto& s : StepLossyAll(cm, c)) {
      bool too_long = std::any_of(s.next.channels.begin(), s.next.channels.end(),
                                  [&](const Word& w) { return w.size() > channel_bound; });
      if (too_long) {
        r.complete = false;
        continue;
      }
      if (seen.emplace(s.next, true).second) queue.push_back(std::move(s.next));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Bounded lasso search

namespace {

// Marks nodes lying on some cycle (iterative Tarjan).
std::vector<char> OnCycle(const std::vector<std::vector<std::uint32_t>>& adj) {
  const std::uint32_t n = static_cast<std::uint32_t>(adj.size());
  constexpr std::uint32_t kNone = 0xffffffffu;
  std::vector<std::uint32_t> index(n, kNone), low(n, 0);
  std::vector<char> on_stack(n, 0), cyclic(n, 0);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::size_t>> call;
  std::uint32_t counter = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      std::uint32_t v = call.back().first;
      std::size_t& next = call.back().second;
      if (next < adj[v].size()) {
        std::uint32_t w = adj[v][next++];
        if (w == v) cyclic[v] = 1;
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[v]);
      if (low[v] == index[v]) {
        std::vector<std::uint32_t> members;
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          members.push_back(w);
        } while (w != v);
        if (members.size() > 1) {
          for (auto m : members) cyclic[m] = 1;
        }
      }
    }
  }
  return cyclic;
}

}  // namespace

LassoSearchResult BoundedLassoSearch(const ChannelMachine& cm, std::uint32_t target,
                                     std::size_t channel_bound, std::size_t depth_bound) {
  LassoSearchResult result;
  struct Arc {
    std::uint32_t dst;
    std::uint32_t transition;
  };
  std::vector<CmConfig> nodes{InitialCmConfig(cm)};
  std::unordered_map<CmConfig, std::uint32_t, CmConfigHash> index{{nodes[0], 0}};
  std::vector<std::vector<Arc>> out;
  std::vector<std::int64_t> parent{-1};
  std::vector<std::uint32_t> parent_transition{0};
  for (std::uint32_t v = 0; v < nodes.size(); ++v) {
    if (v >= depth_bound) {
      result.budget_hit = true;
      break;
    }
    out.emplace_back();
    CmConfig cur = nodes[v];
    for (auto& s : StepLossy(cm, cur)) {
      bool too_long = std::any_of(s.next.channels.begin(), s.next.channels.end(),
                                  [&](const Word& w) { return w.size() > channel_bound; });
      if (too_long) continue;
      auto [it, fresh] = index.emplace(s.next, static_cast<std::uint32_t>(nodes.size()));
      if (fresh) {
        nodes.push_back(std::move(s.next));
        parent.push_back(v);
        parent_transition.push_back(s.transition);
      }
      out[v].push_back(Arc{it->second, s.transition});
    }
  }
  const std::uint32_t expanded = static_cast<std::uint32_t>(out.size());
  result.explored = expanded;

  // Only target nodes inside a nontrivial SCC can host the loop.
  std::vector<std::vector<std::uint32_t>> adj(expanded);
  for (std::uint32_t u = 0; u < expanded; ++u) {
    for (const Arc& a : out[u]) {
      if (a.dst < expanded) adj[u].push_back(a.dst);
    }
  }
  std::vector<char> cyclic = OnCycle(adj);

  // Shortest cycle through the BFS-first qualifying node.
  for (std::uint32_t v = 0; v < expanded; ++v) {
    if (nodes[v].state != target || !cyclic[v]) continue;
    std::unordered_map<std::uint32_t, std::pair<std::uint32_t, std::uint32_t>> via;
    std::deque<std::uint32_t> queue{v};
    bool closed = false;
    std::pair<std::uint32_t, std::uint32_t> last{};
    while (!queue.empty() && !closed) {
      std::uint32_t u = queue.front();
      queue.pop_front();
      if (u >= expanded) continue;
      for (const Arc& a : out[u]) {
        if (a.dst == v) {
          closed = true;
          last = {u, a.transition};
          break;
        }
        if (!via.count(a.dst)) {
          via[a.dst] = {u, a.transition};
          queue.push_back(a.dst);
        }
      }
    }
    if (!closed) continue;
    CmLasso lasso;
    lasso.start = nodes[0];
    for (std::uint32_t u = v; parent[u] >= 0; u = static_cast<std::uint32_t>(parent[u])) {
      lasso.stem.push_back(CmStep{parent_transition[u], nodes[u]});
    }
    std::reverse(lasso.stem.begin(), lasso.stem.end());
    lasso.loop.push_back(CmStep{last.second, nodes[v]});
    for (std::uint32_t u = last.first; u != v; u = via[u].first) {
      lasso.loop.push_back(CmStep{via[u].second, nodes[u]});
    }
    std::reverse(lasso.loop.begin(), lasso.loop.end());
    result.witness = std::move(lasso);
    return result;
  }
  return result;
}

bool ReplaysLossy(const ChannelMachine& cm, const CmConfig& from,
                  const std::vector<CmStep>& steps) {
  CmConfig cur = from;
  for (const auto& s : steps) {
    auto succ = StepLossy(cm, cur);
    bool ok = std::any_of(succ.begin(), succ.end(), [&](const CmStep& x) {
      return x.transition == s.transition && x.next == s.next;
    });
    if (!ok) return false;
    cur = s.next;
  }
  return true;
}

}  // namespace tsolive
