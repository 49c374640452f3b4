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


// Checks shared by the unit tests and the acceptance runner: randomized
// executions audited against hand-written rules, and a direct simulation
// of the store-buffering litmus that does not go through the library IR.

#ifndef TSOLIVE_TESTS_INVARIANTS_HPP_
#define TSOLIVE_TESTS_INVARIANTS_HPP_

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tsolive/semantics.hpp"

namespace invariants {

using namespace tsolive;

// Newest own write to x, else memory; written without the semantics module.
inline ValueId ExpectedRead(const Configuration& c, int pid, LocId x) {
  for (const BufferEntry& e : c.buffers[static_cast<std::size_t>(pid - 1)]) {
    if (e.loc == x) return e.val;
  }
  return c.memory[x];
}

struct SuiteResult {
  std::size_t executions = 0;
  std::size_t steps = 0;
  std::vector<std::string> failures;
};

/**
 * `runs` random TSO executions of at most `length` steps, each audited for
 * FIFO flushing, read coherence, the empty-buffer guard of cas and the
 * buffer bound; plus `runs` random SC executions whose flush-inserted
 * versions must replay under TSO to the same control and memory.
 */
inline SuiteResult RandomInvariantSuite(std::shared_ptr<const Library> lib, int procs, int bound,
                                        int runs, int length, std::uint32_t seed) {
  SuiteResult out;
  std::mt19937 rng(seed);
  const SystemSpec tso = MgcCompose(lib, procs, MemoryModel::kTso, bound);
  const SystemSpec sc = MgcCompose(lib, procs, MemoryModel::kSc, std::nullopt);
  auto fail = [&](const std::string& what) {
    if (out.failures.size() < 20) out.failures.push_back(what);
  };

  for (int run = 0; run < runs; ++run) {
    ++out.executions;
    Configuration c = InitialConfiguration(tso);
    std::vector<std::deque<BufferEntry>> pending(static_cast<std::size_t>(procs));
    for (int k = 0; k < length; ++k) {
      auto steps = EnabledTso(tso, c);
      if (steps.empty()) break;
      const auto& st = steps[std::uniform_int_distribution<std::size_t>(0, steps.size() - 1)(rng)];
      const Action& a = st.action;
      auto& fifo = pending[static_cast<std::size_t>(a.pid - 1)];
      ++out.steps;
      switch (a.kind) {
        case ActionKind::kWrite:
          fifo.push_back({a.loc, a.val});
          break;
        case ActionKind::kFlush:
          if (fifo.empty() || fifo.front().loc != a.loc || fifo.front().val != a.val) {
            fail("flush out of FIFO order");
          } else {
            fifo.pop_front();
          }
          if (st.next.memory[a.loc] != a.val) fail("flush did not update memory");
          break;
        case ActionKind::kRead:
          if (a.val != ExpectedRead(c, a.pid, a.loc)) fail("read incoherent with own buffer");
          break;
        case ActionKind::kCas:
          if (!c.buffers[static_cast<std::size_t>(a.pid - 1)].empty()) {
            fail("cas with a nonempty buffer");
          }
          break;
        default:
          break;
      }
      c = st.next;
      for (std::size_t i = 0; i < c.buffers.size(); ++i) {
        if (c.buffers[i].size() > static_cast<std::size_t>(bound)) fail("buffer over bound");
        if (c.buffers[i].size() != pending[i].size()) fail("buffer length disagrees with writes");
      }
    }
  }

  for (int run = 0; run < runs; ++run) {
    ++out.executions;
    Configuration c = InitialConfiguration(sc);
    Trace t;
    for (int k = 0; k < length; ++k) {
      auto steps = EnabledSc(sc, c);
      if (steps.empty()) break;
      const auto& st = steps[std::uniform_int_distribution<std::size_t>(0, steps.size() - 1)(rng)];
      t.push_back(st.action);
      c = st.next;
      ++out.steps;
    }
    try {
      const SystemSpec tso1 = MgcCompose(lib, procs, MemoryModel::kTso, 1);
      auto ends = ReplayAll(tso1, EmbedScInTso(t), {InitialConfiguration(tso1)});
      bool match = false;
      for (const auto& e : ends) match = match || (e == c);
      if (!match) fail("embedded SC run ends elsewhere under TSO");
    } catch (const ReplayError& e) {
      fail(std::string("embedded SC run does not replay: ") + e.what());
    }
  }
  return out;
}

/// Outcomes (r1, r2) of x:=1; r1:=y || y:=1; r2:=x, by direct enumeration.
inline std::set<std::pair<int, int>> StoreBufferingOutcomes(bool tso) {
  struct State {
    int pc[2] = {0, 0};   // 0: write, 1: read, 2: done
    int mem[2] = {0, 0};  // x, y
    std::deque<int> buf[2];  // pending writes of 1 to own flag
    int r[2] = {-1, -1};
    auto Key() const {
      return std::make_tuple(pc[0], pc[1], mem[0], mem[1], buf[0].size(), buf[1].size(), r[0], r[1]);
    }
  };
  std::set<std::pair<int, int>> outcomes;
  std::set<decltype(State{}.Key())> seen;
  std::vector<State> stack{State{}};
  while (!stack.empty()) {
    State s = stack.back();
    stack.pop_back();
    if (!seen.insert(s.Key()).second) continue;
    if (s.pc[0] == 2 && s.pc[1] == 2 && s.buf[0].empty() && s.buf[1].empty()) {
      outcomes.insert({s.r[0], s.r[1]});
    }
    for (int i = 0; i < 2; ++i) {
      const int own = i, other = 1 - i;
      if (s.pc[i] == 0) {
        State n = s;
        if (tso) {
          n.buf[i].push_back(1);
        } else {
          n.mem[own] = 1;
        }
        n.pc[i] = 1;
        stack.push_back(n);
      } else if (s.pc[i] == 1) {
        State n = s;
        n.r[i] = n.mem[other];  // the other flag is never in the own buffer
        n.pc[i] = 2;
        stack.push_back(n);
      }
      if (!s.buf[i].empty()) {
        State n = s;
        n.mem[own] = n.buf[i].front();
        n.buf[i].pop_front();
        stack.push_back(n);
      }
    }
  }
  return outcomes;
}

}  // namespace invariants

#endif  // TSOLIVE_TESTS_INVARIANTS_HPP_
