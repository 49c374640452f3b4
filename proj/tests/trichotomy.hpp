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


// Checks on L(A,B) runs: once failSimu is set every running method
// finishes on its own, and the guess phase keeps returning.

#ifndef TSOLIVE_TESTS_TRICHOTOMY_HPP_
#define TSOLIVE_TESTS_TRICHOTOMY_HPP_

#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tsolive/cpcp.hpp"
#include "tsolive/semantics.hpp"

namespace trichotomy {

using namespace tsolive;

inline std::vector<StepResult> SoloSteps(const SystemSpec& spec, const Configuration& c, int pid) {
  std::vector<StepResult> out;
  for (auto& s : EnabledTso(spec, c)) {
    if (s.action.pid == pid) out.push_back(std::move(s));
  }
  return out;
}

/**
 * Longest solo run of `pid` from `c` before its method returns, or -1 when
 * some solo run can go on forever, dead-ends without returning, or exceeds
 * `budget` steps.
 */
inline int SoloReturnBound(const SystemSpec& spec, const Configuration& c, int pid, int budget) {
  std::unordered_map<Configuration, int, ConfigurationHash> memo;
  std::unordered_set<Configuration, ConfigurationHash> on_path;
  std::function<int(const Configuration&, int)> longest = [&](const Configuration& x,
                                                              int depth) -> int {
    if (depth > budget) return -1;
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    if (!on_path.insert(x).second) return -1;
    int best = 0;
    bool any = false;
    for (const auto& s : SoloSteps(spec, x, pid)) {
      any = true;
      if (s.action.kind == ActionKind::kReturn) {
        best = std::max(best, 1);
        continue;
      }
      int sub = longest(s.next, depth + 1);
      if (sub < 0) {
        best = -1;
        break;
      }
      best = std::max(best, sub + 1);
    }
    on_path.erase(x);
    if (!any) best = -1;
    memo[x] = best;
    return best;
  };
  return longest(c, 0);
}

struct SampleReport {
  std::size_t samples = 0;
  std::size_t in_flight = 0;
  int longest_solo = 0;
  std::vector<std::string> failures;
};

/// Random MGC runs of L(A,B) with two processes; every distinct
/// configuration with failSimu = true in memory is a sample.
inline SampleReport SampleFailSimu(const ReductionLibrary& r, int bound, std::size_t want,
                                   std::uint32_t seed, int budget) {
  SampleReport out;
  auto lib = std::make_shared<Library>(r.library);
  const SystemSpec spec = MgcCompose(lib, 2, MemoryModel::kTso, bound);
  std::mt19937 rng(seed);
  std::unordered_set<Configuration, ConfigurationHash> seen;
  for (int walk = 0; walk < 10'000 && out.samples < want; ++walk) {
    Configuration c = InitialConfiguration(spec);
    const int length = std::uniform_int_distribution<int>(5, 120)(rng);
    for (int k = 0; k < length; ++k) {
      auto steps = EnabledTso(spec, c);
      if (steps.empty()) break;
      // Calls dominate the choice set; pick the process first, then a step.
      const int pid = std::uniform_int_distribution<int>(1, 2)(rng);
      std::vector<std::size_t> mine;
      for (std::size_t i = 0; i < steps.size(); ++i) {
        if (steps[i].action.pid == pid) mine.push_back(i);
      }
      if (mine.empty()) continue;
      c = steps[mine[std::uniform_int_distribution<std::size_t>(0, mine.size() - 1)(rng)]].next;
      if (c.memory[r.fail_simu] != r.v_true || !seen.insert(c).second) continue;
      ++out.samples;
      for (int p = 1; p <= 2; ++p) {
        if (c.control[static_cast<std::size_t>(p - 1)] == kInClient) continue;
        ++out.in_flight;
        int n = SoloReturnBound(spec, c, p, budget);
        if (n < 0) {
          if (out.failures.size() < 10) {
            out.failures.push_back("process " + std::to_string(p) + " does not return from " +
                                   FormatConfiguration(*lib, c));
          }
        } else {
          out.longest_solo = std::max(out.longest_solo, n);
        }
      }
      if (out.samples >= want) break;
    }
  }
  return out;
}

/// Between two consecutive returns of M1 by process 1 there is exactly one
/// return of M2 by process 2, and the number of M1 returns is positive.
inline bool GuessRoundsReturn(const ReductionLibrary& r, const Trace& stem, std::string* why) {
  std::size_t m1 = 0, m2_since = 0, m2_total = 0;
  for (const Action& a : stem) {
    if (a.kind != ActionKind::kReturn) continue;
    if (a.pid == 1 && a.method == r.m1) {
      if (m1 > 0 && m2_since != 1) {
        if (why) *why = "round " + std::to_string(m1) + " saw " + std::to_string(m2_since) +
                        " M2 returns";
        return false;
      }
      ++m1;
      m2_since = 0;
    } else if (a.pid == 2 && a.method == r.m2) {
      ++m2_since;
      ++m2_total;
    } else {
      if (why) *why = "unexpected return";
      return false;
    }
  }
  if (m1 == 0 || m2_total < m1) {
    if (why) *why = "too few returns";
    return false;
  }
  return true;
}

}  // namespace trichotomy

#endif  // TSOLIVE_TESTS_TRICHOTOMY_HPP_
